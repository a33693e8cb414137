#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"

namespace optoent::cli {

using nlohmann::json;

double tau_of(const SystemRates& rates) { return 2.0 * constants::two_pi / (rates.omega[0] + rates.omega[1]); }

namespace {

SteadyOptions steady_options(const Scenario& s) {
  SteadyOptions o;
  o.tolerance = s.numerics.steady_tolerance;
  return o;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::marginal: return "marginal";
  }
  return "unknown";
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json complex_matrix_json(const Eigen::MatrixXcd& m) {
  return {{"re", matrix_json(m.real())}, {"im", matrix_json(m.imag())}};
}

}  // namespace

SteadyResult run_steady(const Scenario& s) {
  SteadyResult r;
  r.rates = scenario_rates(s);
  r.means = steady_means(r.rates, steady_options(s));
  const Mat8 A = build_drift(r.means.point, r.rates);
  r.stability = stability_check(A);
  if (r.stability.verdict != Verdict::stable) {
    throw UnstableError(fmt::format("CW working point is {} (margin {:.3e} rad/s)", verdict_name(r.stability.verdict),
                                    r.stability.margin / r.rates.time_unit),
                        r.stability.margin / r.rates.time_unit);
  }
  r.V = lyapunov_steady(A, build_diffusion(r.rates, s.numerics.diffusion));
  r.report = entanglement_report(r.V, 0.0);
  r.report.stable = true;
  return r;
}

EvolutionResult run_evolution(const Scenario& s) {
  EvolutionResult r;
  r.rates = scenario_rates(s);
  const SystemRates& rates = r.rates;
  const SteadyMeans start = steady_means(rates, steady_options(s));
  const Mat8 D = build_diffusion(rates, s.numerics.diffusion);
  const Mat8 V0 = lyapunov_steady(build_drift(start.point, rates), D);

  r.tau = tau_of(rates);
  r.period = rates.modulated() ? constants::two_pi / rates.drive_frequency : r.tau;
  const auto spp = static_cast<long>(s.outputs.samples_per_period);
  const double h_max = s.numerics.dt_factor * max_step(rates, start.point);
  const long per_period = spp * static_cast<long>(std::ceil(r.period / (h_max * static_cast<double>(spp))));
  r.dt = r.period / static_cast<double>(per_period);
  const double periods = std::ceil(s.numerics.t_max_tau * r.tau / r.period - 1e-9);

  MeanFieldPropagator means(rates, start, 0.5 * r.dt, s.numerics.meanfield);
  EvolveOptions opts;
  opts.t_end = periods * r.period;
  opts.dt = r.dt;
  opts.stride = static_cast<std::size_t>(per_period / spp);
  r.samples = evolve_covariance(V0, drift_schedule(means), D, opts);

  r.series.reserve(r.samples.size());
  for (const auto& smp : r.samples) r.series.push_back(entanglement_report(smp.V, smp.t));

  r.orbit = quasi_steady_orbit(r.samples, constants::two_pi / r.period, s.numerics.orbit_tolerance);
  OrbitSummary& sum = r.summary;
  sum.converged = r.orbit.converged;
  sum.change = r.orbit.change;
  const std::size_t first = r.series.size() - std::min(r.series.size(), r.orbit.period.size());
  sum.min_eta = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (std::size_t k = first; k < r.series.size(); ++k) {
    const EntanglementReport& e = r.series[k];
    if (e.eta_min < sum.min_eta) {
      sum.min_eta = e.eta_min;
      sum.t_min_eta = e.t;
    }
    sum.max_log_negativity = std::max(sum.max_log_negativity, e.log_negativity);
    sum.mean_nbar1 += e.nbar1;
    sum.mean_nbar2 += e.nbar2;
    ++count;
  }
  if (count > 0) {
    sum.mean_nbar1 /= static_cast<double>(count);
    sum.mean_nbar2 /= static_cast<double>(count);
  }
  return r;
}

std::vector<SweepRow> run_sweep(const Scenario& s, int threads) {
  const double e0 = s.config.drive.trap.cw_amplitude;
  auto axis = [](const std::vector<double>& v, double current) {
    return v.empty() ? std::vector<double>{current} : v;
  };
  const auto amps = axis(s.sweep.amplitude_rel_trap, s.config.drive.control[0].cw_amplitude / e0);
  const auto dets = axis(s.sweep.detuning_over_omega1, s.config.drive.control[0].detuning / s.omega[0]);
  const auto wds = axis(s.sweep.mod_frequency_over_sum, s.config.drive.mod_frequency / (s.omega[0] + s.omega[1]));

  std::vector<SweepRow> rows;
  for (double a : amps)
    for (double d : dets)
      for (double w : wds) {
        SweepRow row;
        row.amplitude_rel_trap = a;
        row.detuning_over_omega1 = d;
        row.mod_frequency_over_sum = w;
        rows.push_back(row);
      }

  auto work = [&s](SweepRow& row) {
    try {
      Scenario point = s;
      if (!s.sweep.amplitude_rel_trap.empty()) set_control_amplitude(point, row.amplitude_rel_trap);
      if (!s.sweep.detuning_over_omega1.empty()) set_control_detuning(point, row.detuning_over_omega1);
      if (!s.sweep.mod_frequency_over_sum.empty()) set_mod_frequency(point, row.mod_frequency_over_sum);
      revalidate(point);
      if (scenario_rates(point).modulated()) {
        const EvolutionResult ev = run_evolution(point);
        const OrbitSummary& o = ev.summary;
        row.status = o.converged ? "ok" : "nonconverged";
        row.t_over_tau = o.t_min_eta / ev.tau;
        row.eta_min = o.min_eta;
        row.log_negativity = o.max_log_negativity;
        row.nbar1 = o.mean_nbar1;
        row.nbar2 = o.mean_nbar2;
      } else {
        const SteadyResult st = run_steady(point);
        row.status = "ok";
        row.eta_min = st.report.eta_min;
        row.log_negativity = st.report.log_negativity;
        row.nbar1 = st.report.nbar1;
        row.nbar2 = st.report.nbar2;
      }
    } catch (const ConfigError&) {
      row.status = "invalid";
    } catch (const UnstableError&) {
      row.status = "unstable";
    } catch (const ConvergenceError&) {
      row.status = "nonconverged";
    }
    if (row.status == "invalid" || row.status == "unstable" ||
        (row.status == "nonconverged" && row.eta_min == 0.0)) {
      row.eta_min = row.log_negativity = row.nbar1 = row.nbar2 = std::numeric_limits<double>::quiet_NaN();
    }
  };

  const auto n_threads = static_cast<std::size_t>(std::max(1, threads));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&]() {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      try {
        work(rows[k]);
      } catch (...) {
        const std::lock_guard<std::mutex> guard(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n_threads, rows.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

EffectiveResult run_effective(const Scenario& s) {
  EffectiveResult r;
  r.rates = scenario_rates(s);
  r.means = steady_means(r.rates, steady_options(s));
  const WorkingPoint& wp = r.means.point;
  const double tau = tau_of(r.rates);
  r.harmonics = sample_harmonics(r.rates, s.numerics.meanfield, s.numerics.jformula, s.numerics.settle_tau * tau,
                                 s.numerics.harmonic_samples);
  r.advice = resonance_advisor(wp.omega_eff[0], wp.omega_eff[1]);
  r.coupling_ratio = coupling_ratio(wp, r.rates);
  r.weak = weak_coupling(wp, r.rates);
  r.bath = effective_bath(wp, r.rates, s.numerics.diffusion);
  const ReducedModel model{r.harmonics, wp.omega_eff, r.bath};
  r.generator = reduced_generator(model);
  for (const auto& [j, l] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
    const auto found = rwa_classify(j, l, wp.omega_eff[0], wp.omega_eff[1], r.rates.drive_frequency);
    r.processes.insert(r.processes.end(), found.begin(), found.end());
  }
  try {
    r.reduced_eta_min = eta_min(reduced_steady(model));
    r.reduced_stable = true;
  } catch (const UnstableError&) {
    r.reduced_stable = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Output

std::string csv_header() { return "t_over_tau,eta_min,E_N,nbar1,nbar2\n"; }

std::string csv_series(const EvolutionResult& r) {
  std::string out = csv_header();
  for (const auto& e : r.series) {
    out += fmt::format("{:.10g},{:.12g},{:.12g},{:.12g},{:.12g}\n", e.t / r.tau, e.eta_min, e.log_negativity,
                       e.nbar1, e.nbar2);
  }
  return out;
}

std::string csv_sweep(const std::vector<SweepRow>& rows) {
  std::string out = "amplitude_rel_trap,detuning_over_omega1,mod_frequency_over_sum,t_over_tau,eta_min,E_N,nbar1,nbar2,status\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.10g},{:.10g},{:.10g},{:.10g},{:.12g},{:.12g},{:.12g},{:.12g},{}\n", r.amplitude_rel_trap,
                       r.detuning_over_omega1, r.mod_frequency_over_sum, r.t_over_tau, r.eta_min, r.log_negativity,
                       r.nbar1, r.nbar2, r.status);
  }
  return out;
}

json report_json(const EntanglementReport& r, double tau) {
  return {{"t_over_tau", r.t / tau},     {"eta_min", r.eta_min}, {"log_negativity", r.log_negativity},
          {"entangled", r.eta_min < 0.5}, {"nbar1", r.nbar1},     {"nbar2", r.nbar2},
          {"stable", r.stable}};
}

namespace {

json settings_json(const Scenario& s, const SystemRates& rates) {
  const double unit = 1.0 / rates.time_unit;
  return {{"name", s.name},
          {"omega_rad_s", {s.omega[0], s.omega[1]}},
          {"tau_s", tau_of(rates) * rates.time_unit},
          {"kappa_rad_s", {rates.kappa[0] * unit, rates.kappa[1] * unit}},
          {"nbar_th", {rates.nbar_th[0], rates.nbar_th[1]}},
          {"mod_frequency_rad_s", rates.drive_frequency * unit},
          {"meanfield", to_string(s.numerics.meanfield)},
          {"diffusion", to_string(s.numerics.diffusion)},
          {"jformula", to_string(s.numerics.jformula)},
          {"warnings", s.warnings}};
}

json working_point_json(const WorkingPoint& wp, const SystemRates& rates) {
  const double unit = 1.0 / rates.time_unit;
  return {{"amplitude_re", {wp.means.a[0].real(), wp.means.a[1].real()}},
          {"amplitude_im", {wp.means.a[0].imag(), wp.means.a[1].imag()}},
          {"position", {wp.means.x[0], wp.means.x[1]}},
          {"detuning_rad_s", {wp.detuning[0] * unit, wp.detuning[1] * unit}},
          {"omega_eff_rad_s", {wp.omega_eff[0] * unit, wp.omega_eff[1] * unit}},
          {"coupling_rad_s", complex_matrix_json(wp.coupling * unit)}};
}

}  // namespace

json steady_json(const Scenario& s, const SteadyResult& r) {
  const double unit = 1.0 / r.rates.time_unit;
  return {{"command", "steady"},
          {"settings", settings_json(s, r.rates)},
          {"stability",
           {{"verdict", verdict_name(r.stability.verdict)},
            {"margin_rad_s", r.stability.margin * unit},
            {"routh_hurwitz", r.stability.routh_hurwitz}}},
          {"mean_field", {{"iterations", r.means.iterations}, {"residual", r.means.residual}}},
          {"working_point", working_point_json(r.means.point, r.rates)},
          {"report", report_json(r.report, tau_of(r.rates))},
          {"covariance", matrix_json(r.V)}};
}

json evolution_json(const Scenario& s, const EvolutionResult& r) {
  const OrbitSummary& o = r.summary;
  return {{"command", "evolve"},
          {"settings", settings_json(s, r.rates)},
          {"dt_over_tau", r.dt / r.tau},
          {"period_over_tau", r.period / r.tau},
          {"t_end_over_tau", r.samples.back().t / r.tau},
          {"quasi_steady",
           {{"converged", o.converged},
            {"period_change", o.change},
            {"min_eta", o.min_eta},
            {"t_min_eta_over_tau", o.t_min_eta / r.tau},
            {"max_log_negativity", o.max_log_negativity},
            {"entangled", o.min_eta < 0.5},
            {"mean_nbar1", o.mean_nbar1},
            {"mean_nbar2", o.mean_nbar2}}},
          {"final", report_json(r.series.back(), r.tau)},
          {"final_covariance", matrix_json(r.samples.back().V)}};
}

json effective_json(const Scenario& s, const EffectiveResult& r) {
  const double unit = 1.0 / r.rates.time_unit;
  const JHarmonics& h = r.harmonics;
  json processes = json::array();
  for (const auto& p : r.processes) {
    processes.push_back({{"kind", to_string(p.kind)},
                         {"natural_frequency_rad_s", p.natural_frequency * unit},
                         {"resonant", p.resonant},
                         {"harmonic", p.harmonic},
                         {"mismatch_rad_s", p.mismatch * unit}});
  }
  return {{"command", "effective"},
          {"settings", settings_json(s, r.rates)},
          {"working_point", working_point_json(r.means.point, r.rates)},
          {"J0_rad_s", matrix_json(h.j0 * unit)},
          {"J1_rad_s", complex_matrix_json(h.j1 * unit)},
          {"J2_rad_s", complex_matrix_json(h.j2 * unit)},
          {"harmonic_norms_rad_s", {h.norm(0) * unit, h.norm(1) * unit, h.norm(2) * unit}},
          {"harmonic_residual", h.residual},
          {"advisor",
           {{"sum_frequency_rad_s", r.advice.omega_sum * unit}, {"half_frequency_rad_s", r.advice.omega_half * unit}}},
          {"coupling_over_kappa", matrix_json(r.coupling_ratio)},
          {"weak_coupling", r.weak},
          {"effective_bath",
           {{"damping_rad_s", {r.bath.damping[0] * unit, r.bath.damping[1] * unit}},
            {"occupancy", {r.bath.occupancy[0], r.bath.occupancy[1]}}}},
          {"processes", processes},
          {"reduced_model",
           {{"harmonic", r.generator.harmonic},
            {"frame_frequency_rad_s", r.generator.frame_frequency * unit},
            {"stable", r.reduced_stable},
            {"eta_min", r.reduced_stable ? json(r.reduced_eta_min) : json(nullptr)}}}};
}

}  // namespace optoent::cli
