#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optoent/dynamics.hpp"
#include "optoent/meanfield.hpp"
#include "optoent/model.hpp"

namespace optoent {

enum class JFormula {
  printed,       // (kappa^2 + Delta^2)^2 denominator
  single_power,  // (kappa^2 + Delta^2) denominator
};

/// Cavity-mediated mechanical-mechanical coupling J_jl. Evaluated in model
/// units (Omega_1 = 1).
Eigen::Matrix2d effective_J(const WorkingPoint& wp, const SystemRates& rates, JFormula formula = JFormula::printed);

/// |G_ij| / kappa_i for every mode/object pair.
Eigen::Matrix2d coupling_ratio(const WorkingPoint& wp, const SystemRates& rates);
bool weak_coupling(const WorkingPoint& wp, const SystemRates& rates);

/// J(t) ~ J0 + Re(J1 e^{i w t}) + Re(J2 e^{2 i w t}).
struct JHarmonics {
  Eigen::Matrix2d j0 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2cd j1 = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd j2 = Eigen::Matrix2cd::Zero();
  double omega_d = 0.0;
  double residual = 0.0;  // rms of what the three harmonics miss, relative to rms J

  /// Frobenius norm of harmonic k (0, 1 or 2).
  double norm(int k) const;
};

/// Projects samples spanning exactly one drive period (first and last
/// sample one period apart) onto harmonics 0, 1, 2. Throws
/// std::invalid_argument if the samples are not periodic.
JHarmonics modulation_harmonics(const std::vector<double>& times, const std::vector<Eigen::Matrix2d>& samples,
                                double omega_d, double periodicity_tol = 1e-3);

/// J(t) over one drive period after `settle` model time units of mean-field
/// evolution, with `samples` points per period.
JHarmonics sample_harmonics(const SystemRates& rates, MeanFieldMode mode, JFormula formula, double settle,
                            int samples = 256);

struct ResonanceAdvice {
  double omega_sum = 0.0;
  double omega_half = 0.0;
};
ResonanceAdvice resonance_advisor(double omega1, double omega2);

enum class ProcessKind { frequency_shift, single_mode_squeeze, hopping, two_mode_squeeze };
std::string to_string(ProcessKind kind);

struct Process {
  ProcessKind kind;
  double natural_frequency = 0.0;  // oscillation rate in the rotating frame
  bool resonant = false;
  int harmonic = -1;               // index of the J harmonic that cancels it
  double mismatch = 0.0;           // |k omega_D - natural_frequency| for that harmonic
};

/// Processes generated by the (j, l) term of the effective Hamiltonian with
/// resonance screening; j, l are 0-based object indices. `tolerance` <= 0
/// selects 1e-2 (Omega1 + Omega2) / 2.
std::vector<Process> rwa_classify(int j, int l, double omega1, double omega2, double omega_d, double tolerance = 0.0);

/// Local damping and occupation of each mechanical mode after eliminating
/// the cavity: intrinsic bath plus weak-coupling optical damping and
/// back-action.
struct LocalBath {
  std::array<double, 2> damping{};
  std::array<double, 2> occupancy{};
};
LocalBath effective_bath(const WorkingPoint& wp, const SystemRates& rates,
                         DiffusionForm form = DiffusionForm::exact);

struct ReducedModel {
  JHarmonics harmonics;
  std::array<double, 2> omega_eff{1.0, 1.0};
  LocalBath bath;
};

/// Frame choice and generator of the RWA two-mode model. The frame rotates
/// both modes at harmonic * omega_D / 2; harmonic 0 means (Omega1 + Omega2) / 2
/// with no squeezing terms.
struct ReducedGenerator {
  int harmonic = 0;
  double frame_frequency = 0.0;
  Eigen::Matrix4d drift = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d diffusion = Eigen::Matrix4d::Zero();
};
ReducedGenerator reduced_generator(const ReducedModel& model);

struct ReducedSample {
  double t = 0.0;
  Eigen::Matrix4d V;
};

/// Integrates the rotating-frame 4x4 covariance on [0, t_end].
std::vector<ReducedSample> reduced_two_mode_evolve(const ReducedModel& model, const Eigen::Matrix4d& V0,
                                                   double t_end, double dt, std::size_t stride = 1);

/// Quasi-steady mechanical covariance of the reduced model. Throws
/// UnstableError above the parametric threshold.
Eigen::Matrix4d reduced_steady(const ReducedModel& model);

}  // namespace optoent
