// optoent: batch front end for scenario files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "optoent/errors.hpp"

namespace {

namespace fs = std::filesystem;
using namespace optoent;
using namespace optoent::cli;

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kUnstable = 3, kNotConverged = 4 };

struct Flags {
  std::string scenario;
  std::string out;
  std::string format;  // empty: write everything
  int threads = 1;
  std::string diffusion;
  std::string jformula;
  std::string meanfield;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory (default: scenario outputs.directory)");
  cmd->add_option("--format", f.format, "Output kind; both when omitted")->check(CLI::IsMember({"csv", "report"}));
  cmd->add_option("--threads", f.threads, "Worker threads for sweep")->check(CLI::PositiveNumber);
  cmd->add_option("--diffusion", f.diffusion, "Thermal diffusion form")->check(CLI::IsMember({"exact", "high-t"}));
  cmd->add_option("--jformula", f.jformula, "Effective coupling denominator")
      ->check(CLI::IsMember({"printed", "single-power"}));
  cmd->add_option("--meanfield", f.meanfield, "Mean-field treatment")->check(CLI::IsMember({"ode", "quasistatic"}));
}

Scenario load(const Flags& f) {
  Scenario s = load_scenario(f.scenario);
  if (!f.diffusion.empty()) s.numerics.diffusion = parse_diffusion(f.diffusion);
  if (!f.jformula.empty()) s.numerics.jformula = parse_jformula(f.jformula);
  if (!f.meanfield.empty()) s.numerics.meanfield = parse_meanfield(f.meanfield);
  if (!f.out.empty()) s.outputs.directory = f.out;
  for (const auto& w : s.warnings) fmt::print(stderr, "warning: {}\n", w);
  return s;
}

fs::path write_file(const Scenario& s, const std::string& suffix, const std::string& body) {
  const fs::path dir(s.outputs.directory);
  fs::create_directories(dir);
  const fs::path path = dir / (s.name + suffix);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << body;
  return path;
}

bool wants(const Flags& f, const char* kind) { return f.format.empty() || f.format == kind; }

int cmd_steady(const Flags& f) {
  const Scenario s = load(f);
  const SteadyResult r = run_steady(s);
  const double tau = tau_of(r.rates);
  if (wants(f, "report")) write_file(s, "_steady.json", steady_json(s, r).dump(2) + "\n");
  if (wants(f, "csv")) {
    const EntanglementReport& e = r.report;
    write_file(s, "_steady.csv",
               csv_header() + fmt::format("{:.10g},{:.12g},{:.12g},{:.12g},{:.12g}\n", e.t / tau, e.eta_min,
                                          e.log_negativity, e.nbar1, e.nbar2));
  }
  fmt::print("{}: stable, eta_min = {:.6f}, E_N = {:.6f}, nbar = ({:.4g}, {:.4g})\n", s.name, r.report.eta_min,
             r.report.log_negativity, r.report.nbar1, r.report.nbar2);
  return kOk;
}

int cmd_evolve(const Flags& f) {
  const Scenario s = load(f);
  const EvolutionResult r = run_evolution(s);
  if (wants(f, "csv")) write_file(s, "_evolve.csv", csv_series(r));
  if (wants(f, "report")) write_file(s, "_evolve.json", evolution_json(s, r).dump(2) + "\n");
  const OrbitSummary& o = r.summary;
  fmt::print("{}: quasi-steady min eta = {:.6f}, max E_N = {:.6f}, period change = {:.2e}{}\n", s.name, o.min_eta,
             o.max_log_negativity, o.change, o.converged ? "" : " (not converged)");
  return o.converged ? kOk : kNotConverged;
}

int cmd_sweep(const Flags& f) {
  const Scenario s = load(f);
  const auto rows = run_sweep(s, f.threads);
  if (wants(f, "csv")) write_file(s, "_sweep.csv", csv_sweep(rows));
  if (wants(f, "report")) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& r : rows) {
      points.push_back({{"amplitude_rel_trap", r.amplitude_rel_trap},
                        {"detuning_over_omega1", r.detuning_over_omega1},
                        {"mod_frequency_over_sum", r.mod_frequency_over_sum},
                        {"status", r.status},
                        {"t_over_tau", r.t_over_tau},
                        {"eta_min", std::isfinite(r.eta_min) ? nlohmann::json(r.eta_min) : nlohmann::json(nullptr)},
                        {"log_negativity",
                         std::isfinite(r.log_negativity) ? nlohmann::json(r.log_negativity) : nlohmann::json(nullptr)},
                        {"nbar1", std::isfinite(r.nbar1) ? nlohmann::json(r.nbar1) : nlohmann::json(nullptr)},
                        {"nbar2", std::isfinite(r.nbar2) ? nlohmann::json(r.nbar2) : nlohmann::json(nullptr)}});
    }
    write_file(s, "_sweep.json", nlohmann::json{{"command", "sweep"}, {"name", s.name}, {"points", points}}.dump(2) + "\n");
  }
  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.status == "ok";
  fmt::print("{}: {} grid points, {} ok\n", s.name, rows.size(), ok);
  return kOk;
}

int cmd_effective(const Flags& f) {
  const Scenario s = load(f);
  const EffectiveResult r = run_effective(s);
  write_file(s, "_effective.json", effective_json(s, r).dump(2) + "\n");
  const double unit = 1.0 / r.rates.time_unit;
  fmt::print("{}: |J0| = {:.4g}, |J1| = {:.4g}, |J2| = {:.4g} rad/s, weak coupling: {}\n", s.name,
             r.harmonics.norm(0) * unit, r.harmonics.norm(1) * unit, r.harmonics.norm(2) * unit,
             r.weak ? "yes" : "no");
  return kOk;
}

int cmd_validate(const Flags& f) {
  const Scenario s = load(f);
  fmt::print("{}: valid ({} warning{})\n", s.name, s.warnings.size(), s.warnings.size() == 1 ? "" : "s");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian entanglement dynamics of two trapped dielectrics in a driven cavity"};
  app.require_subcommand(1);
  Flags flags;
  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Verb verbs[] = {
      {"steady", "CW steady state and entanglement report", cmd_steady},
      {"evolve", "Covariance evolution under the modulated drive", cmd_evolve},
      {"sweep", "Grid over amplitude, detuning and modulation frequency", cmd_sweep},
      {"effective", "Cavity-mediated coupling J and its drive harmonics", cmd_effective},
      {"validate", "Schema and parameter check only", cmd_validate},
  };
  std::vector<std::pair<CLI::App*, const Verb*>> subs;
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    add_flags(sub, flags);
    subs.emplace_back(sub, &v);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    for (const auto& [sub, verb] : subs) {
      if (sub->parsed()) return verb->run(flags);
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: invalid configuration: {}\n", e.what());
    return kConfig;
  } catch (const UnstableError& e) {
    fmt::print(stderr, "error: unstable: {} (margin {:.3e})\n", e.what(), e.margin());
    return kUnstable;
  } catch (const ConvergenceError& e) {
    fmt::print(stderr, "error: not converged: {} (residual {:.3e})\n", e.what(), e.residual());
    return kNotConverged;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}
