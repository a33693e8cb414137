#include "optoent/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"

namespace optoent {

namespace {

constexpr cplx I{0.0, 1.0};

MeanState axpy(const MeanState& s, double h, const MeanState& d) {
  MeanState r;
  for (std::size_t k = 0; k < 2; ++k) {
    r.a[k] = s.a[k] + h * d.a[k];
    r.x[k] = s.x[k] + h * d.x[k];
    r.p[k] = s.p[k] + h * d.p[k];
  }
  return r;
}

double state_norm(const MeanState& s) {
  double n = 0.0;
  for (std::size_t k = 0; k < 2; ++k) n += std::norm(s.a[k]) + s.x[k] * s.x[k] + s.p[k] * s.p[k];
  return std::sqrt(n);
}

double state_distance(const MeanState& u, const MeanState& v) {
  double n = 0.0;
  for (std::size_t k = 0; k < 2; ++k)
    n += std::norm(u.a[k] - v.a[k]) + (u.x[k] - v.x[k]) * (u.x[k] - v.x[k]) + (u.p[k] - v.p[k]) * (u.p[k] - v.p[k]);
  return std::sqrt(n);
}

std::array<double, 2> effective_detuning(const SystemRates& r, const std::array<double, 2>& bare,
                                         const std::array<double, 2>& x) {
  std::array<double, 2> d{};
  for (Eigen::Index i = 0; i < 2; ++i) {
    double shift = 0.0;
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double xj = x[static_cast<std::size_t>(j)];
      shift += r.g_lin(i, j) * xj + r.g_quad(i, j) * xj * xj;
    }
    d[static_cast<std::size_t>(i)] = bare[static_cast<std::size_t>(i)] + shift;
  }
  return d;
}

}  // namespace

WorkingPoint make_working_point(const SystemRates& rates, const MeanState& means,
                                const std::array<double, 2>& bare_detuning, double t) {
  WorkingPoint wp;
  wp.t = t;
  wp.means = means;
  wp.detuning = effective_detuning(rates, bare_detuning, means.x);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto js = static_cast<std::size_t>(j);
    double shift = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i) {
      const auto is = static_cast<std::size_t>(i);
      wp.coupling(i, j) = means.a[is] * (rates.g_lin(i, j) + 2.0 * rates.g_quad(i, j) * means.x[js]);
      shift += std::norm(means.a[is]) * rates.g_quad(i, j);
    }
    wp.omega_eff[js] = rates.omega[js] + 2.0 * shift;
  }
  return wp;
}

MeanState mean_field_rhs(const SystemRates& r, const MeanState& s, const std::array<double, 2>& bare,
                         double t) {
  MeanState d;
  const auto delta = effective_detuning(r, bare, s.x);
  for (std::size_t i = 0; i < 2; ++i) {
    d.a[i] = -(r.kappa[i] + I * delta[i]) * s.a[i] + r.drive(static_cast<int>(i), t);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    double force = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      force += std::norm(s.a[i]) * (r.g_lin(ii, jj) + 2.0 * r.g_quad(ii, jj) * s.x[j]);
    }
    d.x[j] = r.omega[j] * s.p[j];
    d.p[j] = -r.omega[j] * s.x[j] - r.gamma[j] * s.p[j] - force;
  }
  return d;
}

double steady_residual(const SystemRates& rates, const MeanState& s, const std::array<double, 2>& bare) {
  SystemRates cw = rates;
  cw.drive_mod = {0.0, 0.0};
  const MeanState d = mean_field_rhs(cw, s, bare, 0.0);
  double scale = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    scale += cw.drive_cw[k] * cw.drive_cw[k];
    scale += std::pow(cw.omega[k] * s.x[k], 2);
  }
  scale = std::sqrt(scale);
  const double num = state_norm(d);
  return scale > 0.0 ? num / scale : num;
}

SteadyMeans steady_means(const SystemRates& rates, const SteadyOptions& opts) {
  const bool effective = rates.convention == DetuningConvention::effective;
  MeanState s;
  std::array<double, 2> bare = rates.detuning;

  auto update = [&](const MeanState& cur) {
    MeanState next;
    const auto delta = effective ? rates.detuning : effective_detuning(rates, bare, cur.x);
    for (std::size_t i = 0; i < 2; ++i) next.a[i] = rates.drive_cw[i] / (rates.kappa[i] + I * delta[i]);
    for (std::size_t j = 0; j < 2; ++j) {
      double lin = 0.0;
      double stiff = rates.omega[j];
      for (std::size_t i = 0; i < 2; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        lin += std::norm(next.a[i]) * rates.g_lin(ii, jj);
        stiff += 2.0 * std::norm(next.a[i]) * rates.g_quad(ii, jj);
      }
      next.x[j] = -lin / stiff;
    }
    return next;
  };

  int it = 0;
  double change = 0.0;
  for (; it < opts.max_iterations; ++it) {
    const MeanState target = update(s);
    const MeanState next = axpy(s, opts.damping, axpy(target, -1.0, s));
    change = state_distance(next, s);
    s = next;
    const double scale = std::max(state_norm(s), 1e-300);
    if (change <= opts.tolerance * scale || state_norm(s) == 0.0) {
      ++it;
      break;
    }
  }
  if (effective) {
    const auto shift = effective_detuning(rates, {0.0, 0.0}, s.x);
    for (std::size_t i = 0; i < 2; ++i) bare[i] = rates.detuning[i] - shift[i];
    // Re-evaluate with the final positions so the amplitudes are exact.
    for (std::size_t i = 0; i < 2; ++i) s.a[i] = rates.drive_cw[i] / (rates.kappa[i] + I * rates.detuning[i]);
  }

  SteadyMeans out;
  out.bare_detuning = bare;
  out.iterations = it;
  out.residual = steady_residual(rates, s, bare);
  out.point = make_working_point(rates, s, bare, 0.0);
  if (it >= opts.max_iterations || out.residual > 1e3 * opts.tolerance) {
    throw ConvergenceError(fmt::format("mean-field fixed point did not converge after {} iterations "
                                       "(residual {:.3e}); the scenario may be bistable",
                                       it, out.residual),
                           out.residual);
  }
  return out;
}

double max_step(const SystemRates& rates, const WorkingPoint& wp) {
  double fastest = rates.drive_frequency;
  for (std::size_t k = 0; k < 2; ++k) {
    fastest = std::max({fastest, rates.omega[k], wp.omega_eff[k], std::abs(wp.detuning[k]), rates.kappa[k]});
  }
  return constants::two_pi / (200.0 * fastest);
}

MeanFieldPropagator::MeanFieldPropagator(const SystemRates& rates, const SteadyMeans& start, double h,
                                         MeanFieldMode mode)
    : rates_(rates), bare_(start.bare_detuning), h_(h), mode_(mode), cw_(start.point.means),
      state_(start.point.means) {
  if (!(h > 0.0)) throw ConfigError("mean-field step must be > 0");
}

void MeanFieldPropagator::advance() {
  const double t = static_cast<double>(step_) * h_;
  const MeanState k1 = mean_field_rhs(rates_, state_, bare_, t);
  const MeanState k2 = mean_field_rhs(rates_, axpy(state_, 0.5 * h_, k1), bare_, t + 0.5 * h_);
  const MeanState k3 = mean_field_rhs(rates_, axpy(state_, 0.5 * h_, k2), bare_, t + 0.5 * h_);
  const MeanState k4 = mean_field_rhs(rates_, axpy(state_, h_, k3), bare_, t + h_);
  MeanState sum = axpy(k1, 2.0, k2);
  sum = axpy(sum, 2.0, k3);
  sum = axpy(sum, 1.0, k4);
  state_ = axpy(state_, h_ / 6.0, sum);
  ++step_;
}

WorkingPoint MeanFieldPropagator::point_at_step(long k) {
  const double t = static_cast<double>(k) * h_;
  if (mode_ == MeanFieldMode::quasistatic) {
    MeanState s = cw_;
    const auto delta = effective_detuning(rates_, bare_, cw_.x);
    for (std::size_t i = 0; i < 2; ++i) s.a[i] = rates_.drive(static_cast<int>(i), t) / (rates_.kappa[i] + I * delta[i]);
    return make_working_point(rates_, s, bare_, t);
  }
  if (k < step_) throw std::logic_error("mean-field propagator queried backwards in time");
  while (step_ < k) advance();
  return make_working_point(rates_, state_, bare_, t);
}

WorkingPoint MeanFieldPropagator::at(double t) {
  const double kf = t / h_;
  const long k = std::lround(kf);
  if (std::abs(kf - static_cast<double>(k)) > 1e-6) {
    throw std::logic_error(fmt::format("time {} is not on the mean-field grid (step {})", t, h_));
  }
  if (k == cached_step_) return cached_;
  cached_ = point_at_step(k);
  cached_step_ = k;
  return cached_;
}

std::vector<WorkingPoint> integrate_means(const SystemRates& rates, double t_end, double dt, MeanFieldMode mode,
                                          std::size_t stride, double halving_tol) {
  const SteadyMeans start = steady_means(rates);
  const double limit = max_step(rates, start.point);
  if (dt > limit * (1.0 + 1e-12)) {
    throw ConvergenceError(fmt::format("step {:.4g} exceeds the stability rule {:.4g}", dt, limit), dt / limit);
  }
  if (mode == MeanFieldMode::ode) {
    // Step-halving check across one drive period (or one mechanical period).
    const double period = constants::two_pi / (rates.modulated() ? rates.drive_frequency : rates.omega[0]);
    const long n = std::max(1L, std::lround(std::ceil(period / dt)));
    MeanFieldPropagator coarse(rates, start, dt, mode);
    MeanFieldPropagator fine(rates, start, 0.5 * dt, mode);
    const WorkingPoint a = coarse.at(static_cast<double>(n) * dt);
    const WorkingPoint b = fine.at(static_cast<double>(n) * dt);
    const double err = state_distance(a.means, b.means) / std::max(state_norm(b.means), 1e-300);
    if (err > halving_tol) {
      throw ConvergenceError(fmt::format("step-halving check failed: relative error {:.3e}", err), err);
    }
  }
  MeanFieldPropagator prop(rates, start, dt, mode);
  std::vector<WorkingPoint> out;
  const long steps = std::lround(std::floor(t_end / dt + 1e-9));
  const std::size_t every = std::max<std::size_t>(1, stride);
  out.reserve(static_cast<std::size_t>(steps) / every + 1);
  for (long k = 0; k <= steps; ++k) {
    const WorkingPoint wp = prop.at(static_cast<double>(k) * dt);
    if (static_cast<std::size_t>(k) % every == 0) out.push_back(wp);
  }
  return out;
}

namespace {

using StateVec = Eigen::Matrix<double, 8, 1>;

StateVec pack(const MeanState& s) {
  StateVec v;
  v << s.a[0].real(), s.a[0].imag(), s.a[1].real(), s.a[1].imag(), s.x[0], s.x[1], s.p[0], s.p[1];
  return v;
}

MeanState unpack(const StateVec& v) {
  MeanState s;
  s.a = {cplx(v(0), v(1)), cplx(v(2), v(3))};
  s.x = {v(4), v(5)};
  s.p = {v(6), v(7)};
  return s;
}

}  // namespace

SteadyMeans periodic_means(const SystemRates& rates, const SteadyMeans& cw, double h, double tolerance,
                           int max_iterations) {
  if (!rates.modulated()) return cw;
  const double period = constants::two_pi / rates.drive_frequency;
  const long n = std::max(1L, static_cast<long>(std::ceil(period / h - 1e-9)));
  const double step = period / static_cast<double>(n);
  auto period_map = [&](const StateVec& v) {
    SteadyMeans seed = cw;
    seed.point.means = unpack(v);
    MeanFieldPropagator prop(rates, seed, step);
    return pack(prop.at(static_cast<double>(n) * step).means);
  };

  StateVec v = pack(cw.point.means);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const StateVec f = period_map(v) - v;
    const double scale = std::max(v.norm(), 1.0);
    residual = f.norm() / scale;
    if (residual <= tolerance) {
      SteadyMeans out = cw;
      out.point = make_working_point(rates, unpack(v), cw.bare_detuning, 0.0);
      out.iterations = it;
      out.residual = residual;
      return out;
    }
    // Finite-difference Jacobian of the return map minus the identity.
    Eigen::Matrix<double, 8, 8> J;
    for (int k = 0; k < 8; ++k) {
      StateVec w = v;
      const double d = 1e-7 * std::max(std::abs(v(k)), 1e-3 * scale);
      w(k) += d;
      J.col(k) = (period_map(w) - w - f) / d;
    }
    const StateVec dv = J.fullPivLu().solve(f);
    // Backtrack until the return-map mismatch shrinks.
    double lambda = 1.0;
    for (; lambda > 1e-4; lambda *= 0.5) {
      const StateVec trial = v - lambda * dv;
      const StateVec ft = period_map(trial) - trial;
      if (trial.allFinite() && ft.allFinite() && ft.norm() < f.norm()) break;
    }
    if (!(lambda > 1e-4)) break;
    v -= lambda * dv;
  }
  throw ConvergenceError(fmt::format("periodic mean-field orbit not found (residual {:.3e})", residual), residual);
}

double lamb_dicke_excursion(const SystemRates& rates, const MeanState& s) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      worst = std::max(worst, rates.lamb_dicke(i, j) * std::abs(s.x[static_cast<std::size_t>(j)]));
  return worst;
}

}  // namespace optoent
