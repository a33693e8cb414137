#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "optoent/dynamics.hpp"
#include "optoent/effective.hpp"
#include "optoent/meanfield.hpp"
#include "optoent/model.hpp"

namespace optoent::cli {

inline constexpr int kSchemaVersion = 1;

struct Numerics {
  double dt_factor = 1.0;  // fraction of the step-rule maximum, in (0, 1]
  double t_max_tau = 400.0;
  double settle_tau = 400.0;  // mean-field settling before J harmonics are sampled
  int harmonic_samples = 256;
  double orbit_tolerance = 1e-3;
  double steady_tolerance = 1e-12;
  MeanFieldMode meanfield = MeanFieldMode::ode;
  DiffusionForm diffusion = DiffusionForm::exact;
  JFormula jformula = JFormula::printed;
};

/// Grids for `sweep`; empty axes keep the scenario value.
struct SweepAxes {
  std::vector<double> amplitude_rel_trap;
  std::vector<double> detuning_over_omega1;
  std::vector<double> mod_frequency_over_sum;
};

struct OutputSpec {
  std::string directory = "out";
  int samples_per_period = 20;
};

struct Scenario {
  std::string name;
  SystemConfig config;
  Numerics numerics;
  SweepAxes sweep;
  OutputSpec outputs;
  // Trap-limited mechanical frequencies (rad/s), resolved at load so that
  // ratio-valued fields can be converted to SI.
  std::array<double, 2> omega{};
  std::vector<std::string> warnings;
};

/// Strict parse: unknown keys, wrong types, missing sections and physical
/// invariant violations throw ConfigError.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& fallback_name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

/// Re-derives parameters and warnings after programmatic edits.
void revalidate(Scenario& s);

SystemRates scenario_rates(const Scenario& s);

// Conveniences used by sweeps. Both control modes receive the same value.
void set_control_amplitude(Scenario& s, double rel_trap);
void set_control_detuning(Scenario& s, double over_omega1);
void set_mod_frequency(Scenario& s, double over_sum);

MeanFieldMode parse_meanfield(const std::string& v);
DiffusionForm parse_diffusion(const std::string& v);
JFormula parse_jformula(const std::string& v);
std::string to_string(MeanFieldMode m);
std::string to_string(DiffusionForm d);
std::string to_string(JFormula f);

}  // namespace optoent::cli
