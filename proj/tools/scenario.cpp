#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"

namespace optoent::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("{}.{}: expected a number", where, key));
  return v.get<double>();
}

std::optional<double> maybe_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return number(j, key, where);
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return maybe_number(j, key, where).value_or(fallback);
}

std::string string_or(const json& j, const std::string& key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(fmt::format("{}.{}: expected a string", where, key));
  return j.at(key).get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key, std::size_t expect, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array() || (expect != 0 && v.size() != expect)) {
    throw ConfigError(fmt::format("{}.{}: expected an array of {} numbers", where, key, expect));
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(fmt::format("{}.{}: expected numbers", where, key));
    out.push_back(e.get<double>());
  }
  return out;
}

// Exactly one of the two spellings, or neither when a fallback exists.
std::optional<double> one_of(const json& j, const std::string& si, const std::string& ratio, bool& is_ratio,
                             const std::string& where) {
  const bool a = j.contains(si);
  const bool b = j.contains(ratio);
  if (a && b) throw ConfigError(fmt::format("{}: give either '{}' or '{}', not both", where, si, ratio));
  is_ratio = b;
  if (a) return number(j, si, where);
  if (b) return number(j, ratio, where);
  return std::nullopt;
}

ObjectSpec parse_object(const json& j, const std::string& where) {
  check_keys(j, {"kind", "diameter", "thickness", "radius", "relative_permittivity", "density", "mass",
                 "mechanical_quality", "recoil_scale"},
             where);
  ObjectSpec o;
  const std::string kind = string_or(j, "kind", "microdisk", where);
  if (kind == "microdisk") {
    o.kind = ObjectKind::microdisk;
  } else if (kind == "nanosphere") {
    o.kind = ObjectKind::nanosphere;
  } else {
    throw ConfigError(fmt::format("{}.kind: expected 'microdisk' or 'nanosphere', got '{}'", where, kind));
  }
  o.diameter = number_or(j, "diameter", 0.0, where);
  o.thickness = number_or(j, "thickness", 0.0, where);
  o.radius = number_or(j, "radius", 0.0, where);
  o.relative_permittivity = number_or(j, "relative_permittivity", o.relative_permittivity, where);
  o.density = maybe_number(j, "density", where);
  o.mass_override = maybe_number(j, "mass", where);
  o.mechanical_quality = number_or(j, "mechanical_quality", o.mechanical_quality, where);
  o.recoil_scale = number_or(j, "recoil_scale", o.recoil_scale, where);
  return o;
}

std::vector<double> phase_row(const json& rows, std::size_t i, const std::string& where) {
  const json& v = rows.at(i);
  if (!v.is_array() || v.size() != 2) throw ConfigError(fmt::format("{}.phases[{}]: expected two numbers", where, i));
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(fmt::format("{}.phases[{}]: expected numbers", where, i));
    out.push_back(e.get<double>());
  }
  return out;
}

CavityGeometry parse_cavity(const json& j) {
  const std::string where = "cavity";
  check_keys(j, {"length", "trap_wavelength", "control_wavelengths", "mode_waist", "finesse_eff", "phases",
                 "antinode_separation"},
             where);
  CavityGeometry c;
  c.length = number_or(j, "length", c.length, where);
  c.trap_wavelength = number_or(j, "trap_wavelength", c.trap_wavelength, where);
  if (j.contains("control_wavelengths")) {
    const auto w = numbers(j, "control_wavelengths", 2, where);
    c.control_wavelengths = {w[0], w[1]};
  }
  c.mode_waist = number_or(j, "mode_waist", 0.0, where);
  if (j.contains("finesse_eff")) {
    const auto f = numbers(j, "finesse_eff", 3, where);
    c.finesse_eff = {f[0], f[1], f[2]};
  }
  if (!j.contains("phases")) throw ConfigError("cavity.phases: required (2 x 2, control mode by object)");
  const json& ph = j.at("phases");
  if (!ph.is_array() || ph.size() != 2) throw ConfigError("cavity.phases: expected two rows");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto row = phase_row(ph, i, where);
    c.phases[i] = {row[0], row[1]};
  }
  if (j.contains("antinode_separation")) {
    const json& n = j.at("antinode_separation");
    if (!n.is_number_integer()) throw ConfigError("cavity.antinode_separation: expected an integer");
    c.antinode_separation = n.get<long>();
  }
  return c;
}

struct PendingDrive {
  double cw = 0.0;
  bool cw_ratio = false;
  double mod = 0.0;
  bool mod_ratio = false;
  double detuning = 0.0;
  bool detuning_ratio = false;
};

PendingDrive parse_control(const json& j, const std::string& where) {
  check_keys(j, {"cw_amplitude", "cw_amplitude_rel_trap", "mod_amplitude", "mod_amplitude_rel_trap", "detuning",
                 "detuning_over_omega1"},
             where);
  PendingDrive d;
  d.cw = one_of(j, "cw_amplitude", "cw_amplitude_rel_trap", d.cw_ratio, where).value_or(0.0);
  d.mod = one_of(j, "mod_amplitude", "mod_amplitude_rel_trap", d.mod_ratio, where).value_or(0.0);
  const auto det = one_of(j, "detuning", "detuning_over_omega1", d.detuning_ratio, where);
  if (!det) throw ConfigError(fmt::format("{}: detuning is required", where));
  d.detuning = *det;
  return d;
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::string& fallback_name) {
  check_keys(doc, {"schema_version", "name", "description", "objects", "cavity", "environment", "drive", "numerics",
                   "sweep", "outputs"},
             "scenario");
  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer()) {
    throw ConfigError("scenario: integer 'schema_version' is required");
  }
  if (doc.at("schema_version").get<int>() != kSchemaVersion) {
    throw ConfigError(fmt::format("scenario: unsupported schema_version {} (expected {})",
                                  doc.at("schema_version").get<int>(), kSchemaVersion));
  }
  for (const char* key : {"objects", "cavity", "drive"}) {
    if (!doc.contains(key)) throw ConfigError(fmt::format("scenario: section '{}' is required", key));
  }
  if (doc.contains("description") && !doc.at("description").is_string()) {
    throw ConfigError("scenario.description: expected a string");
  }

  Scenario s;
  s.name = string_or(doc, "name", fallback_name, "scenario");

  const json& objs = doc.at("objects");
  if (!objs.is_array() || objs.size() != 2) throw ConfigError("objects: expected an array of two objects");
  for (std::size_t j = 0; j < 2; ++j) s.config.objects[j] = parse_object(objs[j], fmt::format("objects[{}]", j));

  s.config.cavity = parse_cavity(doc.at("cavity"));

  if (doc.contains("environment")) {
    const json& e = doc.at("environment");
    check_keys(e, {"temperature", "pressure_mbar"}, "environment");
    s.config.environment.temperature = number_or(e, "temperature", s.config.environment.temperature, "environment");
    s.config.environment.pressure_mbar =
        number_or(e, "pressure_mbar", s.config.environment.pressure_mbar, "environment");
  }

  // Drive: the trap fixes E0 and Omega_j, which the ratio-valued fields need.
  const json& dr = doc.at("drive");
  check_keys(dr, {"trap", "control", "mod_frequency", "mod_frequency_over_sum", "detuning_convention"}, "drive");
  {
    const json& trap = dr.at("trap");
    check_keys(trap, {"cw_amplitude", "input_power_W"}, "drive.trap");
    bool from_power = false;
    const auto v = one_of(trap, "cw_amplitude", "input_power_W", from_power, "drive.trap");
    if (!v) throw ConfigError("drive.trap: cw_amplitude or input_power_W is required");
    if (from_power) {
      if (!(*v > 0.0)) throw ConfigError("drive.trap.input_power_W must be > 0");
      const CavityGeometry& c = s.config.cavity;
      s.config.drive.trap.cw_amplitude =
          amplitude_from_power(*v, cavity_linewidth(c.finesse_eff[0], c.length), c.angular_frequency(0));
    } else {
      s.config.drive.trap.cw_amplitude = *v;
    }
  }
  const std::string conv = string_or(dr, "detuning_convention", "effective", "drive");
  if (conv == "effective") {
    s.config.drive.convention = DetuningConvention::effective;
  } else if (conv == "bare") {
    s.config.drive.convention = DetuningConvention::bare;
  } else {
    throw ConfigError("drive.detuning_convention: expected 'effective' or 'bare'");
  }
  const json& ctl = dr.at("control");
  if (!ctl.is_array() || ctl.size() != 2) throw ConfigError("drive.control: expected an array of two drives");
  std::array<PendingDrive, 2> pending{parse_control(ctl[0], "drive.control[0]"),
                                      parse_control(ctl[1], "drive.control[1]")};
  bool wd_ratio = false;
  const double wd = one_of(dr, "mod_frequency", "mod_frequency_over_sum", wd_ratio, "drive").value_or(0.0);

  // First pass with the control drives off resolves the trap frequencies.
  {
    SystemConfig probe = s.config;
    probe.drive.control = {};
    probe.drive.mod_frequency = 0.0;
    const DerivedParams p = derive_params(probe);
    s.omega = p.omega;
  }
  const double e0 = s.config.drive.trap.cw_amplitude;
  for (std::size_t i = 0; i < 2; ++i) {
    const PendingDrive& d = pending[i];
    ModeDrive& m = s.config.drive.control[i];
    m.cw_amplitude = d.cw_ratio ? d.cw * e0 : d.cw;
    m.mod_amplitude = d.mod_ratio ? d.mod * e0 : d.mod;
    m.detuning = d.detuning_ratio ? d.detuning * s.omega[0] : d.detuning;
  }
  s.config.drive.mod_frequency = wd_ratio ? wd * (s.omega[0] + s.omega[1]) : wd;

  if (doc.contains("numerics")) {
    const json& n = doc.at("numerics");
    const std::string where = "numerics";
    check_keys(n, {"dt_factor", "t_max_tau", "settle_tau", "harmonic_samples", "orbit_tolerance", "steady_tolerance",
                   "meanfield", "diffusion", "jformula"},
               where);
    Numerics& num = s.numerics;
    num.dt_factor = number_or(n, "dt_factor", num.dt_factor, where);
    num.t_max_tau = number_or(n, "t_max_tau", num.t_max_tau, where);
    num.settle_tau = number_or(n, "settle_tau", num.settle_tau, where);
    num.harmonic_samples = static_cast<int>(number_or(n, "harmonic_samples", num.harmonic_samples, where));
    num.orbit_tolerance = number_or(n, "orbit_tolerance", num.orbit_tolerance, where);
    num.steady_tolerance = number_or(n, "steady_tolerance", num.steady_tolerance, where);
    num.meanfield = parse_meanfield(string_or(n, "meanfield", to_string(num.meanfield), where));
    num.diffusion = parse_diffusion(string_or(n, "diffusion", to_string(num.diffusion), where));
    num.jformula = parse_jformula(string_or(n, "jformula", to_string(num.jformula), where));
  }
  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    check_keys(sw, {"amplitude_rel_trap", "detuning_over_omega1", "mod_frequency_over_sum"}, "sweep");
    if (sw.contains("amplitude_rel_trap")) s.sweep.amplitude_rel_trap = numbers(sw, "amplitude_rel_trap", 0, "sweep");
    if (sw.contains("detuning_over_omega1")) {
      s.sweep.detuning_over_omega1 = numbers(sw, "detuning_over_omega1", 0, "sweep");
    }
    if (sw.contains("mod_frequency_over_sum")) {
      s.sweep.mod_frequency_over_sum = numbers(sw, "mod_frequency_over_sum", 0, "sweep");
    }
  }
  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    check_keys(o, {"directory", "samples_per_period"}, "outputs");
    s.outputs.directory = string_or(o, "directory", s.outputs.directory, "outputs");
    s.outputs.samples_per_period =
        static_cast<int>(number_or(o, "samples_per_period", s.outputs.samples_per_period, "outputs"));
  }
  revalidate(s);
  return s;
}

void revalidate(Scenario& s) {
  const Numerics& n = s.numerics;
  if (!(n.dt_factor > 0.0 && n.dt_factor <= 1.0)) throw ConfigError("numerics.dt_factor must lie in (0, 1]");
  if (!(n.t_max_tau > 0.0)) throw ConfigError("numerics.t_max_tau must be > 0");
  if (!(n.settle_tau >= 0.0)) throw ConfigError("numerics.settle_tau must be >= 0");
  if (n.harmonic_samples < 8) throw ConfigError("numerics.harmonic_samples must be >= 8");
  if (!(n.orbit_tolerance > 0.0)) throw ConfigError("numerics.orbit_tolerance must be > 0");
  if (!(n.steady_tolerance > 0.0)) throw ConfigError("numerics.steady_tolerance must be > 0");
  if (s.outputs.samples_per_period < 1) throw ConfigError("outputs.samples_per_period must be >= 1");
  const DerivedParams p = derive_params(s.config);
  s.omega = p.omega;
  s.warnings = p.warnings;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return parse_scenario(doc, path.stem().string());
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

SystemRates scenario_rates(const Scenario& s) { return normalize(derive_params(s.config), s.config.drive); }

void set_control_amplitude(Scenario& s, double rel_trap) {
  for (auto& c : s.config.drive.control) c.cw_amplitude = rel_trap * s.config.drive.trap.cw_amplitude;
}

void set_control_detuning(Scenario& s, double over_omega1) {
  for (auto& c : s.config.drive.control) c.detuning = over_omega1 * s.omega[0];
}

void set_mod_frequency(Scenario& s, double over_sum) {
  s.config.drive.mod_frequency = over_sum * (s.omega[0] + s.omega[1]);
}

MeanFieldMode parse_meanfield(const std::string& v) {
  if (v == "ode") return MeanFieldMode::ode;
  if (v == "quasistatic") return MeanFieldMode::quasistatic;
  throw ConfigError(fmt::format("meanfield: expected 'ode' or 'quasistatic', got '{}'", v));
}

DiffusionForm parse_diffusion(const std::string& v) {
  if (v == "exact") return DiffusionForm::exact;
  if (v == "high-t") return DiffusionForm::high_temperature;
  throw ConfigError(fmt::format("diffusion: expected 'exact' or 'high-t', got '{}'", v));
}

JFormula parse_jformula(const std::string& v) {
  if (v == "printed") return JFormula::printed;
  if (v == "single-power") return JFormula::single_power;
  throw ConfigError(fmt::format("jformula: expected 'printed' or 'single-power', got '{}'", v));
}

std::string to_string(MeanFieldMode m) { return m == MeanFieldMode::ode ? "ode" : "quasistatic"; }
std::string to_string(DiffusionForm d) { return d == DiffusionForm::exact ? "exact" : "high-t"; }
std::string to_string(JFormula f) { return f == JFormula::printed ? "printed" : "single-power"; }

}  // namespace optoent::cli
