#include "optoent/effective.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"

namespace optoent {

Eigen::Matrix2d effective_J(const WorkingPoint& wp, const SystemRates& rates, JFormula formula) {
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double kappa = rates.kappa[static_cast<std::size_t>(i)];
    const double delta = wp.detuning[static_cast<std::size_t>(i)];
    const double lorentz = kappa * kappa + delta * delta;
    const double denom = formula == JFormula::printed ? lorentz * lorentz : lorentz;
    for (Eigen::Index j = 0; j < 2; ++j) {
      for (Eigen::Index l = 0; l < 2; ++l) {
        const std::complex<double> prod = wp.coupling(i, j) * std::conj(wp.coupling(i, l));
        J(j, l) += (kappa * prod.imag() + delta * prod.real()) / denom;
      }
    }
  }
  return J;
}

Eigen::Matrix2d coupling_ratio(const WorkingPoint& wp, const SystemRates& rates) {
  Eigen::Matrix2d r;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) r(i, j) = std::abs(wp.coupling(i, j)) / rates.kappa[static_cast<std::size_t>(i)];
  return r;
}

bool weak_coupling(const WorkingPoint& wp, const SystemRates& rates) { return coupling_ratio(wp, rates).maxCoeff() < 1.0; }

double JHarmonics::norm(int k) const {
  switch (k) {
    case 0: return j0.norm();
    case 1: return j1.norm();
    case 2: return j2.norm();
    default: throw std::out_of_range("JHarmonics::norm: harmonic must be 0, 1 or 2");
  }
}

JHarmonics modulation_harmonics(const std::vector<double>& times, const std::vector<Eigen::Matrix2d>& samples,
                                double omega_d, double periodicity_tol) {
  if (times.size() != samples.size() || samples.size() < 3) {
    throw std::invalid_argument("modulation_harmonics: need at least 3 matching samples");
  }
  if (!(omega_d > 0.0)) throw std::invalid_argument("modulation_harmonics: omega_d must be > 0");
  const double period = constants::two_pi / omega_d;
  const double span = times.back() - times.front();
  if (std::abs(span - period) > 1e-6 * period) {
    throw std::invalid_argument("modulation_harmonics: samples must span exactly one drive period");
  }
  double peak = 0.0;
  for (const auto& s : samples) peak = std::max(peak, s.norm());
  if ((samples.back() - samples.front()).norm() > periodicity_tol * std::max(peak, 1e-300)) {
    throw std::invalid_argument("modulation_harmonics: J(t) is not periodic over the drive period");
  }

  // Uniform samples, endpoint excluded.
  const std::size_t n = samples.size() - 1;
  JHarmonics h;
  h.omega_d = omega_d;
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = omega_d * times[k];
    const std::complex<double> e1 = std::polar(1.0, -phase);
    const std::complex<double> e2 = std::polar(1.0, -2.0 * phase);
    h.j0 += samples[k];
    h.j1 += samples[k].cast<std::complex<double>>() * e1;
    h.j2 += samples[k].cast<std::complex<double>>() * e2;
  }
  const double inv = 1.0 / static_cast<double>(n);
  h.j0 *= inv;
  h.j1 *= 2.0 * inv;
  h.j2 *= 2.0 * inv;

  double miss = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = omega_d * times[k];
    const Eigen::Matrix2d recon = h.j0 + (h.j1 * std::polar(1.0, phase)).real() +
                                  (h.j2 * std::polar(1.0, 2.0 * phase)).real();
    miss += (samples[k] - recon).squaredNorm();
    total += samples[k].squaredNorm();
  }
  h.residual = total > 0.0 ? std::sqrt(miss / total) : 0.0;
  return h;
}

JHarmonics sample_harmonics(const SystemRates& rates, MeanFieldMode mode, JFormula formula, double settle,
                            int samples) {
  const SteadyMeans start = steady_means(rates);
  if (!rates.modulated()) {
    JHarmonics h;
    h.j0 = effective_J(start.point, rates, formula);
    return h;
  }
  const double period = constants::two_pi / rates.drive_frequency;
  const int n = std::max(samples, 8);
  const double rule = max_step(rates, start.point);
  const int sub = std::max(1, static_cast<int>(std::ceil(period / n / rule)));
  const double h = period / (n * sub);
  const long first = static_cast<long>(std::ceil(settle / period)) * n * sub;
  SteadyMeans orbit = start;
  if (mode == MeanFieldMode::ode) {
    // Settle, then refine onto the periodic orbit so that weakly damped
    // transients do not leak into the harmonics.
    MeanFieldPropagator settling(rates, start, h, mode);
    orbit.point = settling.at(static_cast<double>(first) * h);
    try {
      orbit = periodic_means(rates, orbit, h);
    } catch (const ConvergenceError&) {
      // Keep the settled state; the periodicity check below has the last word.
    }
  }
  MeanFieldPropagator prop(rates, orbit, h, mode);
  std::vector<double> times;
  std::vector<Eigen::Matrix2d> js;
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(static_cast<long>(k) * sub) * h;
    times.push_back(t);
    js.push_back(effective_J(prop.at(t), rates, formula));
  }
  return modulation_harmonics(times, js, rates.drive_frequency);
}

ResonanceAdvice resonance_advisor(double omega1, double omega2) {
  const double sum = omega1 + omega2;
  return {sum, 0.5 * sum};
}

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::frequency_shift: return "frequency-shift";
    case ProcessKind::single_mode_squeeze: return "single-mode-squeeze";
    case ProcessKind::hopping: return "hopping";
    case ProcessKind::two_mode_squeeze: return "two-mode-squeeze";
  }
  return "unknown";
}

std::vector<Process> rwa_classify(int j, int l, double omega1, double omega2, double omega_d, double tolerance) {
  if (j < 0 || j > 1 || l < 0 || l > 1) throw std::out_of_range("rwa_classify: object index must be 0 or 1");
  const double tol = tolerance > 0.0 ? tolerance : 1e-2 * 0.5 * (omega1 + omega2);
  const std::array<double, 2> w{omega1, omega2};
  std::vector<Process> out;
  auto screen = [&](ProcessKind kind, double f) {
    Process p{kind, f};
    p.mismatch = std::numeric_limits<double>::infinity();
    const int top = omega_d > 0.0 ? 2 : 0;
    for (int k = 0; k <= top; ++k) {
      const double mis = std::abs(k * omega_d - f);
      if (mis < p.mismatch) {
        p.mismatch = mis;
        p.harmonic = k;
      }
    }
    p.resonant = p.mismatch <= tol;
    if (!p.resonant) p.harmonic = -1;
    out.push_back(p);
  };
  const auto js = static_cast<std::size_t>(j);
  const auto ls = static_cast<std::size_t>(l);
  if (j == l) {
    screen(ProcessKind::frequency_shift, 0.0);
    screen(ProcessKind::single_mode_squeeze, 2.0 * w[js]);
  } else {
    screen(ProcessKind::hopping, std::abs(w[js] - w[ls]));
    screen(ProcessKind::two_mode_squeeze, w[js] + w[ls]);
  }
  return out;
}

LocalBath effective_bath(const WorkingPoint& wp, const SystemRates& rates, DiffusionForm form) {
  LocalBath bath;
  for (std::size_t j = 0; j < 2; ++j) {
    const double om = wp.omega_eff[j];
    double down = 0.0;
    double up = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double k = rates.kappa[i];
      const double d = wp.detuning[i];
      const double g2 = std::norm(wp.coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      down += g2 * k / (k * k + (d - om) * (d - om));
      up += g2 * k / (k * k + (d + om) * (d + om));
    }
    const double optical = down - up;
    const double occupation = form == DiffusionForm::exact ? 2.0 * rates.nbar_th[j] + 1.0 : 2.0 / rates.thermal_ratio[j];
    const double intrinsic = 0.5 * occupation * (rates.gamma[j] + rates.recoil[j]);
    bath.damping[j] = rates.gamma[j] + optical;
    // Balance: damping (n + 1/2) = intrinsic diffusion + optical (up + down) / 2.
    const double diffusion = intrinsic + 0.5 * (down + up);
    bath.occupancy[j] = bath.damping[j] > 0.0 ? diffusion / bath.damping[j] - 0.5 : rates.nbar_th[j];
  }
  return bath;
}

ReducedGenerator reduced_generator(const ReducedModel& model) {
  ReducedGenerator g;
  const JHarmonics& h = model.harmonics;
  const double sum = model.omega_eff[0] + model.omega_eff[1];
  const bool modulated = h.omega_d > 0.0 && (h.norm(1) > 0.0 || h.norm(2) > 0.0);
  Eigen::Matrix2cd squeeze = Eigen::Matrix2cd::Zero();
  if (modulated) {
    g.harmonic = std::abs(h.omega_d - sum) <= std::abs(2.0 * h.omega_d - sum) ? 1 : 2;
    g.frame_frequency = 0.5 * g.harmonic * h.omega_d;
    squeeze = g.harmonic == 1 ? h.j1 : h.j2;
  } else {
    g.harmonic = 0;
    g.frame_frequency = 0.5 * sum;
  }

  // Quadratic Hamiltonian H = r^T K r / 2 in r = (X1, P1, X2, P2).
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  for (int j = 0; j < 2; ++j) {
    for (int l = 0; l < 2; ++l) {
      const double detune = j == l ? model.omega_eff[static_cast<std::size_t>(j)] - g.frame_frequency : 0.0;
      const std::complex<double> c = squeeze(j, l);
      K(2 * j, 2 * l) = detune - h.j0(j, l) - 0.5 * c.real();
      K(2 * j + 1, 2 * l + 1) = detune - h.j0(j, l) + 0.5 * c.real();
      K(2 * j, 2 * l + 1) += 0.5 * c.imag();
      K(2 * l + 1, 2 * j) += 0.5 * c.imag();
    }
  }
  Eigen::Matrix4d sigma = Eigen::Matrix4d::Zero();
  sigma(0, 1) = sigma(2, 3) = 1.0;
  sigma(1, 0) = sigma(3, 2) = -1.0;
  g.drift = sigma * K;
  for (int j = 0; j < 2; ++j) {
    const double damp = model.bath.damping[static_cast<std::size_t>(j)];
    const double diff = damp * (model.bath.occupancy[static_cast<std::size_t>(j)] + 0.5);
    g.drift(2 * j, 2 * j) -= 0.5 * damp;
    g.drift(2 * j + 1, 2 * j + 1) -= 0.5 * damp;
    g.diffusion(2 * j, 2 * j) = diff;
    g.diffusion(2 * j + 1, 2 * j + 1) = diff;
  }
  return g;
}

std::vector<ReducedSample> reduced_two_mode_evolve(const ReducedModel& model, const Eigen::Matrix4d& V0, double t_end,
                                                   double dt, std::size_t stride) {
  if (!(dt > 0.0)) throw ConfigError("reduced_two_mode_evolve: dt must be > 0");
  const ReducedGenerator g = reduced_generator(model);
  const long steps = std::lround(std::floor(t_end / dt + 1e-9));
  const std::size_t every = std::max<std::size_t>(1, stride);
  auto rhs = [&g](const Eigen::Matrix4d& V) -> Eigen::Matrix4d {
    const Eigen::Matrix4d AV = g.drift * V;
    return AV + AV.transpose() + g.diffusion;
  };
  std::vector<ReducedSample> out;
  Eigen::Matrix4d V = V0;
  out.push_back({0.0, V});
  for (long k = 0; k < steps; ++k) {
    const Eigen::Matrix4d k1 = rhs(V);
    const Eigen::Matrix4d k2 = rhs(V + 0.5 * dt * k1);
    const Eigen::Matrix4d k3 = rhs(V + 0.5 * dt * k2);
    const Eigen::Matrix4d k4 = rhs(V + dt * k3);
    V += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    V = 0.5 * (V + V.transpose()).eval();
    if (static_cast<std::size_t>(k + 1) % every == 0) out.push_back({static_cast<double>(k + 1) * dt, V});
  }
  return out;
}

Eigen::Matrix4d reduced_steady(const ReducedModel& model) {
  const ReducedGenerator g = reduced_generator(model);
  return lyapunov_steady(g.drift, g.diffusion);
}

}  // namespace optoent
