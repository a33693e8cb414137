#include "optoent/model.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"

namespace optoent {

using constants::hbar;
using constants::pi;
using constants::speed_of_light;
using constants::two_pi;

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double wrap_mod_pi(double phase) {
  double r = std::fmod(phase, pi);
  if (r < 0.0) r += pi;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// ObjectSpec

double ObjectSpec::volume() const {
  switch (kind) {
    case ObjectKind::microdisk:
      return pi * 0.25 * diameter * diameter * thickness;
    case ObjectKind::nanosphere:
      return 4.0 / 3.0 * pi * radius * radius * radius;
  }
  return 0.0;
}

void ObjectSpec::validate() const {
  if (kind == ObjectKind::microdisk) {
    require(positive_finite(diameter), "microdisk diameter must be > 0");
    require(positive_finite(thickness), "microdisk thickness must be > 0");
  } else {
    require(positive_finite(radius), "nanosphere radius must be > 0");
  }
  require(std::isfinite(relative_permittivity) && relative_permittivity > 1.0,
          "relative permittivity must be > 1");
  require(density.has_value() != mass_override.has_value(),
          "exactly one of density or mass override must be given");
  if (density) require(positive_finite(*density), "density must be > 0");
  if (mass_override) require(positive_finite(*mass_override), "mass override must be > 0");
  require(positive_finite(mechanical_quality), "mechanical quality must be > 0");
  require(recoil_scale > 0.0 && recoil_scale <= 1.0, "recoil_scale must lie in (0, 1]");
}

// ---------------------------------------------------------------------------
// CavityGeometry

double CavityGeometry::wavelength(int mode) const {
  return mode == 0 ? trap_wavelength : control_wavelengths.at(static_cast<std::size_t>(mode - 1));
}

double CavityGeometry::wavenumber(int mode) const { return two_pi / wavelength(mode); }

double CavityGeometry::angular_frequency(int mode) const {
  return two_pi * speed_of_light / wavelength(mode);
}

double CavityGeometry::effective_waist() const {
  return mode_waist > 0.0 ? mode_waist : kDefaultModeWaist;
}

double CavityGeometry::mode_volume() const {
  return optoent::mode_volume(effective_waist(), length);
}

void CavityGeometry::validate() const {
  require(positive_finite(length), "cavity length must be > 0");
  require(positive_finite(trap_wavelength), "trap wavelength must be > 0");
  for (double w : control_wavelengths) require(positive_finite(w), "control wavelengths must be > 0");
  require(mode_waist >= 0.0 && std::isfinite(mode_waist), "mode waist must be > 0");
  for (double f : finesse_eff) require(std::isfinite(f) && f > 1.0, "effective finesse must be > 1");
  for (const auto& row : phases)
    for (double p : row) require(std::isfinite(p), "phases must be finite");
  if (antinode_separation) {
    for (int i = 0; i < 2; ++i) {
      const double expected = phase_geometry(*antinode_separation, wavenumber(i + 1), trap_wavelength);
      const double actual = phases[static_cast<std::size_t>(i)][1] - phases[static_cast<std::size_t>(i)][0];
      require(std::abs(actual - expected) <= 1e-12 * std::max(1.0, std::abs(expected)),
              fmt::format("phases of control mode {} violate the antinode relation", i + 1));
    }
  }
}

void Environment::validate() const {
  require(positive_finite(temperature), "temperature must be > 0");
  require(pressure_mbar >= 0.0, "pressure must be >= 0");
}

// ---------------------------------------------------------------------------
// DriveSpec

std::vector<std::string> DriveSpec::validate() const {
  std::vector<std::string> warnings;
  require(std::isfinite(trap.cw_amplitude) && trap.cw_amplitude > 0.0,
          "trap drive amplitude must be > 0 (no trap, no mechanical frequency)");
  require(trap.mod_amplitude == 0.0, "the trap drive cannot be modulated");
  require(std::isfinite(mod_frequency) && mod_frequency >= 0.0, "modulation frequency must be >= 0");
  for (std::size_t i = 0; i < control.size(); ++i) {
    const ModeDrive& d = control[i];
    require(std::isfinite(d.cw_amplitude) && d.cw_amplitude >= 0.0,
            fmt::format("control drive {} amplitude must be >= 0", i + 1));
    require(std::isfinite(d.mod_amplitude) && d.mod_amplitude >= 0.0,
            fmt::format("control drive {} modulation amplitude must be >= 0", i + 1));
    require(std::isfinite(d.detuning), fmt::format("control drive {} detuning must be finite", i + 1));
    if (d.mod_amplitude > 0.0) {
      require(d.mod_amplitude < d.cw_amplitude,
              fmt::format("control drive {}: modulation amplitude must stay below the CW amplitude", i + 1));
      require(mod_frequency > 0.0, "modulated drive needs a modulation frequency > 0");
    }
    const double peak = d.cw_amplitude + d.mod_amplitude;
    if (peak > 0.3 * trap.cw_amplitude) {
      warnings.push_back(fmt::format(
          "control drive {} reaches {:.3g} E0; the trap field should dominate the control fields", i + 1,
          peak / trap.cw_amplitude));
    }
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Elementary relations

double derive_mass(const ObjectSpec& obj) {
  if (obj.mass_override) return *obj.mass_override;
  return obj.density.value_or(0.0) * obj.volume();
}

double mode_volume(double waist, double length) { return pi * waist * waist / 4.0 * length; }

double bare_coupling(const ObjectSpec& obj, const CavityGeometry& geom, int mode) {
  const double vd = obj.volume();
  const double vc = geom.mode_volume();
  const double eps = obj.relative_permittivity;
  const double omega = geom.angular_frequency(mode);
  if (obj.kind == ObjectKind::nanosphere) {
    return 3.0 * vd / (2.0 * vc) * ((eps - 1.0) / (eps + 2.0)) * omega;
  }
  return vd / (2.0 * vc) * (eps - 1.0) * omega;
}

double trap_frequency(double g0, double k0, double mass, double trap_photons) {
  return std::sqrt(2.0 * hbar * k0 * k0 / mass * g0 * trap_photons);
}

double zero_point_motion(double mass, double omega) { return std::sqrt(hbar / (2.0 * mass * omega)); }

LambDickeCouplings lamb_dicke_couplings(double g, double k, double x_zp, double phase) {
  return {-std::sqrt(2.0) * k * x_zp * g * std::sin(2.0 * phase),
          2.0 * k * k * x_zp * x_zp * g * std::cos(2.0 * phase)};
}

double recoil_rate(const ObjectSpec& obj, const CavityGeometry& geom, double omega) {
  const double vd = obj.volume();
  const double eps = obj.relative_permittivity;
  const double lambda0 = geom.trap_wavelength;
  double rate = 0.0;
  if (obj.kind == ObjectKind::nanosphere) {
    rate = 2.0 * pi * pi / 5.0 * ((eps - 1.0) / (eps + 2.0)) * vd / (lambda0 * lambda0 * lambda0) * omega;
  } else {
    if (vd <= 0.0) return std::numeric_limits<double>::infinity();
    rate = lambda0 / (4.0 * geom.length) * (geom.mode_volume() / vd) * omega /
           (geom.finesse_eff[0] * (eps - 1.0));
  }
  return rate * obj.recoil_scale;
}

double thermal_occupancy(double omega, double temperature) {
  return 1.0 / std::expm1(hbar * omega / (constants::k_boltzmann * temperature));
}

double cavity_linewidth(double finesse, double length) {
  return pi * speed_of_light / (2.0 * length * finesse);
}

double gas_damping(double omega, double quality) { return omega / quality; }

double phase_geometry(long n, double k, double trap_wavelength) {
  return static_cast<double>(n) * k * trap_wavelength;
}

long find_antinode_separation(double k, double trap_wavelength, double target, long n_max) {
  const double goal = wrap_mod_pi(target);
  long best = 1;
  double best_err = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= n_max; ++n) {
    const double r = wrap_mod_pi(phase_geometry(n, k, trap_wavelength));
    const double err = std::min(std::abs(r - goal), pi - std::abs(r - goal));
    if (err < best_err) {
      best_err = err;
      best = n;
    }
  }
  return best;
}

double amplitude_from_power(double power, double kappa, double omega_laser) {
  return std::sqrt(2.0 * power * kappa / (hbar * omega_laser));
}

// ---------------------------------------------------------------------------
// Aggregation

DerivedParams derive_params(const SystemConfig& cfg) {
  for (const auto& obj : cfg.objects) obj.validate();
  cfg.cavity.validate();
  cfg.environment.validate();

  DerivedParams p;
  p.warnings = cfg.drive.validate();
  const CavityGeometry& cav = cfg.cavity;
  p.mode_waist = cav.effective_waist();
  p.mode_volume = cav.mode_volume();
  p.temperature = cfg.environment.temperature;
  for (int i = 0; i < 3; ++i) {
    p.kappa[static_cast<std::size_t>(i)] = cavity_linewidth(cav.finesse_eff[static_cast<std::size_t>(i)], cav.length);
    p.wavenumber[static_cast<std::size_t>(i)] = cav.wavenumber(i);
  }
  const double trap_amp = cfg.drive.trap.cw_amplitude / p.kappa[0];
  p.trap_photons = trap_amp * trap_amp;

  for (std::size_t j = 0; j < 2; ++j) {
    const ObjectSpec& obj = cfg.objects[j];
    p.volume[j] = obj.volume();
    p.mass[j] = derive_mass(obj);
    for (int i = 0; i < 3; ++i) p.g_bare[static_cast<std::size_t>(i)][j] = bare_coupling(obj, cav, i);
    p.omega[j] = trap_frequency(p.g_bare[0][j], p.wavenumber[0], p.mass[j], p.trap_photons);
    require(p.omega[j] > 0.0, "trap frequency vanished");
    p.x_zp[j] = zero_point_motion(p.mass[j], p.omega[j]);
    p.gamma[j] = gas_damping(p.omega[j], obj.mechanical_quality);
    p.recoil[j] = recoil_rate(obj, cav, p.omega[j]);
    p.nbar_th[j] = thermal_occupancy(p.omega[j], cfg.environment.temperature);
    for (std::size_t i = 0; i < 3; ++i) {
      const double eta = p.wavenumber[i] * p.x_zp[j];
      require(eta < 1e-3, fmt::format("Lamb-Dicke parameter k{}*x_zp{} = {:.3g} is not << 1", i, j + 1, eta));
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto c = lamb_dicke_couplings(p.g_bare[i + 1][j], p.wavenumber[i + 1], p.x_zp[j], cav.phases[i][j]);
      p.g_lin(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.linear;
      p.g_quad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.quadratic;
    }
  }
  return p;
}

double calibrate_mode_waist(const SystemConfig& cfg, double target_omega) {
  require(positive_finite(target_omega), "calibration target must be > 0");
  SystemConfig trial = cfg;
  trial.cavity.mode_waist = cfg.cavity.effective_waist();
  // Omega ~ sqrt(g0) ~ 1/w0 at fixed trap photon number, so the root of
  // Omega(w0) = target follows from a single evaluation.
  const DerivedParams p = derive_params(trial);
  return trial.cavity.mode_waist * p.omega[0] / target_omega;
}

double SystemRates::drive(int mode, double t) const {
  const auto i = static_cast<std::size_t>(mode);
  return drive_cw[i] + drive_mod[i] * std::cos(drive_frequency * t);
}

bool SystemRates::modulated() const {
  return drive_frequency > 0.0 && (drive_mod[0] > 0.0 || drive_mod[1] > 0.0);
}

SystemRates normalize(const DerivedParams& p, const DriveSpec& drive) {
  SystemRates r;
  const double unit = p.omega[0];
  r.time_unit = 1.0 / unit;
  for (std::size_t j = 0; j < 2; ++j) {
    r.omega[j] = p.omega[j] / unit;
    r.gamma[j] = p.gamma[j] / unit;
    r.recoil[j] = p.recoil[j] / unit;
    r.nbar_th[j] = p.nbar_th[j];
    r.thermal_ratio[j] = hbar * p.omega[j] / (constants::k_boltzmann * p.temperature);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    r.kappa[i] = p.kappa[i + 1] / unit;
    r.drive_cw[i] = drive.control[i].cw_amplitude / unit;
    r.drive_mod[i] = drive.control[i].mod_amplitude / unit;
    r.detuning[i] = drive.control[i].detuning / unit;
    for (std::size_t j = 0; j < 2; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      r.lamb_dicke(ii, jj) = p.wavenumber[i + 1] * std::sqrt(2.0) * p.x_zp[j];
    }
  }
  r.g_lin = p.g_lin / unit;
  r.g_quad = p.g_quad / unit;
  r.drive_frequency = drive.mod_frequency / unit;
  r.convention = drive.convention;
  return r;
}

}  // namespace optoent
