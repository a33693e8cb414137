#include "optoent/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"

namespace optoent {

Mat8 build_drift(const WorkingPoint& wp, const SystemRates& rates) {
  const double r2 = std::sqrt(2.0);
  Mat8 A = Mat8::Zero();
  for (int j = 0; j < 2; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const int x = 2 * j;
    const int p = 2 * j + 1;
    A(x, p) = rates.omega[js];
    A(p, x) = -wp.omega_eff[js];
    A(p, p) = -rates.gamma[js];
    for (int i = 0; i < 2; ++i) {
      const int X = 4 + 2 * i;
      const int Y = 5 + 2 * i;
      const std::complex<double> G = wp.coupling(i, j);
      A(p, X) = -r2 * G.real();
      A(p, Y) = -r2 * G.imag();
      A(X, x) = r2 * G.imag();
      A(Y, x) = -r2 * G.real();
    }
  }
  for (int i = 0; i < 2; ++i) {
    const auto is = static_cast<std::size_t>(i);
    const int X = 4 + 2 * i;
    const int Y = 5 + 2 * i;
    A(X, X) = -rates.kappa[is];
    A(Y, Y) = -rates.kappa[is];
    A(X, Y) = wp.detuning[is];
    A(Y, X) = -wp.detuning[is];
  }
  return A;
}

Mat8 build_diffusion(const SystemRates& rates, DiffusionForm form) {
  Mat8 D = Mat8::Zero();
  for (std::size_t j = 0; j < 2; ++j) {
    const double rate = rates.gamma[j] + rates.recoil[j];
    const double occupation = form == DiffusionForm::exact ? 2.0 * rates.nbar_th[j] + 1.0
                                                           : 2.0 / rates.thermal_ratio[j];
    D(static_cast<int>(2 * j + 1), static_cast<int>(2 * j + 1)) = occupation * rate;
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const int X = 4 + 2 * static_cast<int>(i);
    D(X, X) = rates.kappa[i];
    D(X + 1, X + 1) = rates.kappa[i];
  }
  return D;
}

// ---------------------------------------------------------------------------
// Stability

std::vector<long double> characteristic_polynomial(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("characteristic_polynomial: matrix must be square");
  if (n == 0) return {1.0L};
  Eigen::MatrixXd H = n > 2 ? Eigen::MatrixXd(Eigen::HessenbergDecomposition<Eigen::MatrixXd>(A).matrixH()) : A;
  auto h = [&](Eigen::Index r, Eigen::Index c) { return static_cast<long double>(H(r - 1, c - 1)); };

  // polys[i] holds p_i in ascending powers.
  std::vector<std::vector<long double>> polys(static_cast<std::size_t>(n + 1));
  polys[0] = {1.0L};
  for (Eigen::Index i = 1; i <= n; ++i) {
    const auto& prev = polys[static_cast<std::size_t>(i - 1)];
    std::vector<long double> cur(static_cast<std::size_t>(i + 1), 0.0L);
    for (std::size_t k = 0; k < prev.size(); ++k) {
      cur[k + 1] += prev[k];
      cur[k] -= h(i, i) * prev[k];
    }
    long double beta = 1.0L;
    for (Eigen::Index m = 1; m <= i - 1; ++m) {
      beta *= h(i - m + 1, i - m);
      const long double coef = h(i - m, i) * beta;
      const auto& older = polys[static_cast<std::size_t>(i - m - 1)];
      for (std::size_t k = 0; k < older.size(); ++k) cur[k] -= coef * older[k];
    }
    polys[static_cast<std::size_t>(i)] = std::move(cur);
  }
  std::vector<long double> out(polys.back().rbegin(), polys.back().rend());
  return out;
}

bool routh_hurwitz_stable(const std::vector<long double>& coeffs) {
  const std::size_t n = coeffs.size();
  if (n == 0 || coeffs[0] <= 0.0L) return false;
  if (n == 1) return true;
  const std::size_t width = (n + 1) / 2;
  std::vector<long double> upper(width, 0.0L);
  std::vector<long double> lower(width, 0.0L);
  for (std::size_t k = 0; k < n; ++k) (k % 2 == 0 ? upper : lower)[k / 2] = coeffs[k];
  // n-1 further rows below the first.
  for (std::size_t row = 1; row < n; ++row) {
    if (!(lower[0] > 0.0L)) return false;
    std::vector<long double> next(width, 0.0L);
    for (std::size_t k = 0; k + 1 < width; ++k) {
      next[k] = (lower[0] * upper[k + 1] - upper[0] * lower[k + 1]) / lower[0];
    }
    upper = std::move(lower);
    lower = std::move(next);
  }
  return true;
}

StabilityReport stability_check(const Eigen::MatrixXd& A) {
  StabilityReport r;
  const Eigen::VectorXcd ev = A.eigenvalues();
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) max_re = std::max(max_re, ev(k).real());
  r.margin = -max_re;
  r.routh_hurwitz = routh_hurwitz_stable(characteristic_polynomial(A));
  const double scale = std::max(A.norm(), 1e-300);
  if (std::abs(max_re) <= 1e-8 * scale) {
    r.verdict = Verdict::marginal;
  } else {
    r.verdict = r.routh_hurwitz ? Verdict::stable : Verdict::unstable;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lyapunov

Eigen::MatrixXd lyapunov_steady(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || D.rows() != n || D.cols() != n) {
    throw std::invalid_argument("lyapunov_steady: dimension mismatch");
  }
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<std::complex<double>>());
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) max_re = std::max(max_re, T(k, k).real());
  if (!(max_re < 0.0)) {
    throw UnstableError(fmt::format("drift matrix is not stable (max Re lambda = {:.3e}); no steady state", max_re),
                        -max_re);
  }

  // T W + W T^H = C with C = -U^H D U, solved column by column from the right.
  const Eigen::MatrixXcd C = -(U.adjoint() * D.cast<std::complex<double>>() * U);
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = C.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * W.col(k);
    const std::complex<double> shift = std::conj(T(j, j));
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      std::complex<double> acc = rhs(i);
      for (Eigen::Index k = i + 1; k < n; ++k) acc -= T(i, k) * W(k, j);
      W(i, j) = acc / (T(i, i) + shift);
    }
  }
  Eigen::MatrixXd V = (U * W * U.adjoint()).real();
  return 0.5 * (V + V.transpose());
}

double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& V, const Eigen::MatrixXd& D) {
  const double r = (A * V + V * A.transpose() + D).norm();
  const double d = D.norm();
  return d > 0.0 ? r / d : r;
}

// ---------------------------------------------------------------------------
// Time evolution

std::vector<CovarianceSample> evolve_covariance(const Mat8& V0, const DriftSchedule& drift, const Mat8& D,
                                                const EvolveOptions& opts) {
  if (!(opts.dt > 0.0)) throw ConfigError("evolve_covariance: dt must be > 0");
  const long steps = std::lround(std::floor((opts.t_end - opts.t_start) / opts.dt + 1e-9));
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);
  const double h = opts.dt;
  const double limit = opts.blowup_factor * std::max(V0.norm(), 1e-300);

  auto rhs = [&D](const Mat8& A, const Mat8& V) -> Mat8 {
    Mat8 AV = A * V;
    return AV + AV.transpose() + D;
  };

  std::vector<CovarianceSample> out;
  out.reserve(static_cast<std::size_t>(steps) / stride + 2);
  Mat8 V = V0;
  out.push_back({opts.t_start, V});
  for (long k = 0; k < steps; ++k) {
    const double t = opts.t_start + static_cast<double>(k) * h;
    const Mat8 A0 = drift(t);
    const Mat8 Am = drift(t + 0.5 * h);
    const Mat8 A1 = drift(t + h);
    const Mat8 k1 = rhs(A0, V);
    const Mat8 k2 = rhs(Am, V + 0.5 * h * k1);
    const Mat8 k3 = rhs(Am, V + 0.5 * h * k2);
    const Mat8 k4 = rhs(A1, V + h * k3);
    V += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    V = 0.5 * (V + V.transpose()).eval();
    const double norm = V.norm();
    if (!std::isfinite(norm) || norm > limit) {
      throw UnstableError(fmt::format("covariance blew up at t = {:.6g}", t + h), 0.0, t + h);
    }
    if (static_cast<std::size_t>(k + 1) % stride == 0) out.push_back({opts.t_start + static_cast<double>(k + 1) * h, V});
  }
  return out;
}

DriftSchedule drift_schedule(MeanFieldPropagator& means) {
  return [&means](double t) { return build_drift(means.at(t), means.rates()); };
}

QuasiSteadyOrbit quasi_steady_orbit(const std::vector<CovarianceSample>& traj, double omega_d, double tolerance) {
  QuasiSteadyOrbit orbit;
  if (traj.size() < 2) return orbit;
  const double period = constants::two_pi / (omega_d > 0.0 ? omega_d : 1.0);
  const double spacing = traj[1].t - traj[0].t;
  const auto per = static_cast<std::size_t>(std::lround(period / spacing));
  if (per == 0) return orbit;
  if (std::abs(static_cast<double>(per) * spacing - period) > 1e-6 * period) {
    throw std::invalid_argument("quasi_steady_orbit: sample spacing does not divide the drive period");
  }
  if (traj.size() < 2 * per + 1) {
    orbit.change = std::numeric_limits<double>::infinity();
    return orbit;
  }
  const std::size_t first = traj.size() - per;
  double change = 0.0;
  for (std::size_t k = first; k < traj.size(); ++k) {
    const double scale = std::max(traj[k].V.norm(), 1e-300);
    change = std::max(change, (traj[k].V - traj[k - per].V).norm() / scale);
  }
  orbit.change = change;
  orbit.converged = change < tolerance;
  orbit.period.assign(traj.begin() + static_cast<std::ptrdiff_t>(first), traj.end());
  return orbit;
}

}  // namespace optoent
