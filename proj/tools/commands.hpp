#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "optoent/dynamics.hpp"
#include "optoent/effective.hpp"
#include "optoent/gaussian.hpp"
#include "scenario.hpp"

namespace optoent::cli {

/// tau = 4 pi / (Omega_1 + Omega_2) in model units.
double tau_of(const SystemRates& rates);

struct SteadyResult {
  SystemRates rates;
  SteadyMeans means;
  StabilityReport stability;
  Mat8 V = Mat8::Zero();
  EntanglementReport report;
};

/// CW steady state. Throws UnstableError when the drift has no stable fixed point.
SteadyResult run_steady(const Scenario& s);

struct OrbitSummary {
  bool converged = false;
  double change = 0.0;
  double min_eta = 0.0;
  double t_min_eta = 0.0;  // model time of the minimum
  double max_log_negativity = 0.0;
  double mean_nbar1 = 0.0;
  double mean_nbar2 = 0.0;
};

struct EvolutionResult {
  SystemRates rates;
  double tau = 0.0;
  double dt = 0.0;
  double period = 0.0;  // drive period, or tau without modulation
  std::vector<CovarianceSample> samples;
  std::vector<EntanglementReport> series;
  QuasiSteadyOrbit orbit;
  OrbitSummary summary;
};

/// Covariance evolution from the CW steady state. The step obeys the step
/// rule scaled by numerics.dt_factor and divides the drive period.
EvolutionResult run_evolution(const Scenario& s);

struct SweepRow {
  double amplitude_rel_trap = 0.0;
  double detuning_over_omega1 = 0.0;
  double mod_frequency_over_sum = 0.0;
  std::string status;  // ok, unstable, invalid, nonconverged
  double t_over_tau = 0.0;
  double eta_min = 0.0;
  double log_negativity = 0.0;
  double nbar1 = 0.0;
  double nbar2 = 0.0;
};

/// Grid amplitude x detuning x modulation frequency (last index fastest).
/// Modulated points report the quasi-steady orbit, others the CW steady
/// state. Rows come back in grid order for any thread count.
std::vector<SweepRow> run_sweep(const Scenario& s, int threads);

struct EffectiveResult {
  SystemRates rates;
  SteadyMeans means;
  JHarmonics harmonics;
  ResonanceAdvice advice;
  Eigen::Matrix2d coupling_ratio;
  bool weak = false;
  LocalBath bath;
  ReducedGenerator generator;
  std::vector<Process> processes;
  bool reduced_stable = false;
  double reduced_eta_min = 0.0;
};

EffectiveResult run_effective(const Scenario& s);

// Serialization. Rates in reports are converted back to rad/s.
std::string csv_header();
std::string csv_series(const EvolutionResult& r);
std::string csv_sweep(const std::vector<SweepRow>& rows);
nlohmann::json report_json(const EntanglementReport& r, double tau);
nlohmann::json steady_json(const Scenario& s, const SteadyResult& r);
nlohmann::json evolution_json(const Scenario& s, const EvolutionResult& r);
nlohmann::json effective_json(const Scenario& s, const EffectiveResult& r);

}  // namespace optoent::cli
