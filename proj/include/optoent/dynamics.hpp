#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "optoent/meanfield.hpp"
#include "optoent/model.hpp"

namespace optoent {

/// Quadrature ordering u = (x1, p1, x2, p2, X1, Y1, X2, Y2).
using Mat8 = Eigen::Matrix<double, 8, 8>;

enum class DiffusionForm {
  exact,             // (2 nbar + 1)(gamma + Gamma)
  high_temperature,  // 2 k_B T / (hbar Omega) (gamma + Gamma)
};

Mat8 build_drift(const WorkingPoint& wp, const SystemRates& rates);
Mat8 build_diffusion(const SystemRates& rates, DiffusionForm form = DiffusionForm::exact);

enum class Verdict { stable, unstable, marginal };

struct StabilityReport {
  Verdict verdict = Verdict::unstable;
  double margin = 0.0;         // -max Re(eigenvalue)
  bool routh_hurwitz = false;  // raw Routh-Hurwitz table verdict
};

/// Monic characteristic polynomial det(sI - A), highest power first, via
/// Hessenberg reduction and the La Budde recurrence.
std::vector<long double> characteristic_polynomial(const Eigen::MatrixXd& A);

/// True iff every first-column entry of the Routh table is positive.
bool routh_hurwitz_stable(const std::vector<long double>& coeffs);

/// Routh-Hurwitz verdict with an eigenvalue margin. Cases with
/// |max Re| <= 1e-8 ||A|| are reported as marginal.
StabilityReport stability_check(const Eigen::MatrixXd& A);

/// Solves A V + V A^T + D = 0 by complex-Schur substitution. Throws
/// UnstableError when A has an eigenvalue with Re >= 0.
Eigen::MatrixXd lyapunov_steady(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D);

/// ||A V + V A^T + D||_F / ||D||_F (absolute when D = 0).
double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& V, const Eigen::MatrixXd& D);

struct CovarianceSample {
  double t = 0.0;
  Mat8 V;
};

using DriftSchedule = std::function<Mat8(double)>;

struct EvolveOptions {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  std::size_t stride = 1;
  double blowup_factor = 1e6;
};

/// RK4 integration of dV/dt = A(t) V + V A(t)^T + D with re-symmetrization
/// after every step. The schedule is queried at t, t + dt/2 and t + dt.
std::vector<CovarianceSample> evolve_covariance(const Mat8& V0, const DriftSchedule& drift, const Mat8& D,
                                                const EvolveOptions& opts);

/// Drift schedule driven by a mean-field propagator with step dt/2.
DriftSchedule drift_schedule(MeanFieldPropagator& means);

struct QuasiSteadyOrbit {
  std::vector<CovarianceSample> period;
  bool converged = false;
  double change = 0.0;  // max relative change over the last period
};

/// Final drive period of an equally spaced trajectory, compared with the
/// period before it. omega_d <= 0 compares over one mechanical period (2 pi).
QuasiSteadyOrbit quasi_steady_orbit(const std::vector<CovarianceSample>& trajectory, double omega_d,
                                    double tolerance = 1e-3);

}  // namespace optoent
