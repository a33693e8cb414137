#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "optoent/model.hpp"

namespace optoent {

using cplx = std::complex<double>;

/// Classical means: control-mode amplitudes and dimensionless mechanical
/// quadratures.
struct MeanState {
  std::array<cplx, 2> a{};
  std::array<double, 2> x{};
  std::array<double, 2> p{};
};

/// Means plus the effective parameters the fluctuations are linearized about.
/// All rates in model units (Omega_1 = 1).
struct WorkingPoint {
  double t = 0.0;
  MeanState means;
  std::array<double, 2> detuning{};   // Delta_i
  Eigen::Matrix2cd coupling = Eigen::Matrix2cd::Zero();  // G_ij, row i = mode, col j = object
  std::array<double, 2> omega_eff{};  // Omega~_j
};

WorkingPoint make_working_point(const SystemRates& rates, const MeanState& means,
                                const std::array<double, 2>& bare_detuning, double t);

/// Right-hand side of the coherent equations of motion at time t.
MeanState mean_field_rhs(const SystemRates& rates, const MeanState& s,
                         const std::array<double, 2>& bare_detuning, double t);

struct SteadyOptions {
  double damping = 0.5;
  double tolerance = 1e-12;
  int max_iterations = 10000;
};

struct SteadyMeans {
  WorkingPoint point;
  std::array<double, 2> bare_detuning{};
  int iterations = 0;
  double residual = 0.0;
};

/// Self-consistent CW fixed point (modulation ignored). Throws
/// ConvergenceError carrying the last residual when the damped iteration
/// stalls.
SteadyMeans steady_means(const SystemRates& rates, const SteadyOptions& opts = {});

/// Relative norm of the coherent equations evaluated at `s` with CW drive.
double steady_residual(const SystemRates& rates, const MeanState& s,
                       const std::array<double, 2>& bare_detuning);

enum class MeanFieldMode {
  ode,          // integrate the coherent equations in time
  quasistatic,  // a_i(t) = E_i(t) / (kappa_i + i Delta_i), positions frozen
};

/// Largest step allowed by 2 pi / (200 max(Omega_j, |Delta_i|, kappa_i, omega_D)).
double max_step(const SystemRates& rates, const WorkingPoint& wp);

/// Forward RK4 propagation of the coherent means on the grid t = k h,
/// starting from the CW fixed point at t = 0. Queries must be grid points in
/// nondecreasing order; the last two samples stay cached.
class MeanFieldPropagator {
 public:
  MeanFieldPropagator(const SystemRates& rates, const SteadyMeans& start, double h,
                      MeanFieldMode mode = MeanFieldMode::ode);

  WorkingPoint at(double t);
  double step() const { return h_; }
  const SystemRates& rates() const { return rates_; }
  const std::array<double, 2>& bare_detuning() const { return bare_; }

 private:
  WorkingPoint point_at_step(long k);
  void advance();

  SystemRates rates_;
  std::array<double, 2> bare_;
  double h_;
  MeanFieldMode mode_;
  MeanState cw_;
  MeanState state_;
  long step_ = 0;
  long cached_step_ = -1;
  WorkingPoint cached_;
};

/// Samples every `stride`-th grid point on [0, t_end]. Throws
/// ConvergenceError if dt breaks the step rule or if a step-halving check
/// over the first drive period disagrees beyond `halving_tol`.
std::vector<WorkingPoint> integrate_means(const SystemRates& rates, double t_end, double dt,
                                          MeanFieldMode mode = MeanFieldMode::ode,
                                          std::size_t stride = 1, double halving_tol = 1e-6);

/// Point on the periodic mean-field orbit at t = 0 (drive phase zero), found
/// by Newton shooting on the one-period return map with RK4 step <= h.
/// Returns `cw` unchanged without modulation; throws ConvergenceError.
SteadyMeans periodic_means(const SystemRates& rates, const SteadyMeans& cw, double h, double tolerance = 1e-11,
                           int max_iterations = 30);

/// Magnitude of the mean displacement as a Lamb-Dicke phase,
/// max_ij k_i sqrt(2) x_zp,j |<x_j>|.
double lamb_dicke_excursion(const SystemRates& rates, const MeanState& s);

}  // namespace optoent
