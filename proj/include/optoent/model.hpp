#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace optoent {

enum class ObjectKind { microdisk, nanosphere };

/// A single trapped dielectric object. Lengths in m, density in kg/m^3.
struct ObjectSpec {
  ObjectKind kind = ObjectKind::microdisk;
  double diameter = 0.0;   // microdisk only
  double thickness = 0.0;  // microdisk only
  double radius = 0.0;     // nanosphere only
  double relative_permittivity = 2.1;
  std::optional<double> density;
  std::optional<double> mass_override;
  double mechanical_quality = 1e6;
  // Multiplies the recoil decoherence rate, e.g. 0.1 for a cavity that
  // collects 90% of the scattered solid angle.
  double recoil_scale = 1.0;

  double volume() const;
  void validate() const;
};

/// Cavity modes: index 0 is the trap mode, 1 and 2 are the control modes.
struct CavityGeometry {
  double length = 1e-3;
  double trap_wavelength = 1064e-9;
  std::array<double, 2> control_wavelengths{1064e-9, 1064e-9};
  double mode_waist = 0.0;  // 0 selects the calibrated default
  std::array<double, 3> finesse_eff{7e5, 7e5, 7e5};
  // phases[i][j]: phase of object j in control mode i+1. The trap mode has
  // both objects at antinodes.
  std::array<std::array<double, 2>, 2> phases{};
  // Set when phases were generated from an antinode separation of the trap
  // mode; validate() then re-checks the phase relation.
  std::optional<long> antinode_separation;

  double wavelength(int mode) const;
  double wavenumber(int mode) const;
  double angular_frequency(int mode) const;
  double effective_waist() const;
  double mode_volume() const;
  void validate() const;
};

struct Environment {
  double temperature = 0.1;            // K
  double pressure_mbar = 1e-6;         // informational
  double air_molecular_mass = 4.8e-26; // kg, informational
  void validate() const;
};

struct ModeDrive {
  double cw_amplitude = 0.0;   // E^(0), s^-1
  double mod_amplitude = 0.0;  // E^(1), s^-1
  double detuning = 0.0;       // rad/s (effective Delta by default)
};

enum class DetuningConvention { effective, bare };

struct DriveSpec {
  ModeDrive trap;
  std::array<ModeDrive, 2> control;
  double mod_frequency = 0.0;  // omega_D, rad/s
  DetuningConvention convention = DetuningConvention::effective;

  // Returns warnings (E_i > 0.3 E_0); throws ConfigError on hard violations.
  std::vector<std::string> validate() const;
};

struct SystemConfig {
  std::array<ObjectSpec, 2> objects;
  CavityGeometry cavity;
  Environment environment;
  DriveSpec drive;
};

/// Physical rates and couplings in SI units (rad/s unless noted).
struct DerivedParams {
  std::array<double, 2> mass{};
  std::array<double, 2> volume{};
  std::array<double, 2> omega{};
  std::array<double, 2> x_zp{};
  std::array<double, 2> gamma{};
  std::array<double, 2> recoil{};
  std::array<double, 2> nbar_th{};
  std::array<double, 3> kappa{};
  std::array<double, 3> wavenumber{};
  std::array<std::array<double, 2>, 3> g_bare{};  // g_ij, i = 0..2
  Eigen::Matrix2d g_lin = Eigen::Matrix2d::Zero();   // control modes x objects
  Eigen::Matrix2d g_quad = Eigen::Matrix2d::Zero();
  double mode_volume = 0.0;
  double mode_waist = 0.0;
  double trap_photons = 0.0;
  double temperature = 0.0;
  std::vector<std::string> warnings;
};

/// Everything the linearized dynamics needs, in units where Omega_1 = 1.
struct SystemRates {
  double time_unit = 1.0;  // seconds per model time unit (1 / Omega_1)
  std::array<double, 2> omega{1.0, 1.0};
  std::array<double, 2> gamma{};
  std::array<double, 2> recoil{};
  std::array<double, 2> nbar_th{};
  // Ratio hbar*Omega_j / (k_B T), kept for the high-temperature diffusion form.
  std::array<double, 2> thermal_ratio{};
  std::array<double, 2> kappa{};
  Eigen::Matrix2d g_lin = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d g_quad = Eigen::Matrix2d::Zero();
  // k_i * sqrt(2) * x_zp,j: converts a dimensionless mean position into a
  // Lamb-Dicke phase.
  Eigen::Matrix2d lamb_dicke = Eigen::Matrix2d::Zero();
  std::array<double, 2> drive_cw{};
  std::array<double, 2> drive_mod{};
  double drive_frequency = 0.0;
  std::array<double, 2> detuning{};
  DetuningConvention convention = DetuningConvention::effective;

  double drive(int mode, double t) const;
  bool modulated() const;
};

// Reference microdisk waist that yields Omega/2pi = 11 MHz at a 15 mW trap
// drive (see calibrate_mode_waist).
inline constexpr double kDefaultModeWaist = 1.4392837593e-5;

double derive_mass(const ObjectSpec& obj);
double mode_volume(double waist, double length);
double bare_coupling(const ObjectSpec& obj, const CavityGeometry& geom, int mode);
double trap_frequency(double g0, double k0, double mass, double trap_photons);
double zero_point_motion(double mass, double omega);

struct LambDickeCouplings {
  double linear;
  double quadratic;
};
LambDickeCouplings lamb_dicke_couplings(double g, double k, double x_zp, double phase);

double recoil_rate(const ObjectSpec& obj, const CavityGeometry& geom, double omega);
double thermal_occupancy(double omega, double temperature);
double cavity_linewidth(double finesse, double length);
double gas_damping(double omega, double quality);
double phase_geometry(long n, double k, double trap_wavelength);

/// Smallest n in [1, n_max] whose phase offset n*k*lambda_0, reduced mod pi,
/// is closest to `target` (also reduced mod pi).
long find_antinode_separation(double k, double trap_wavelength, double target, long n_max);

/// Drive-rate amplitude E = sqrt(2 P kappa / (hbar omega_L)).
double amplitude_from_power(double power, double kappa, double omega_laser);

DerivedParams derive_params(const SystemConfig& cfg);

/// Waist for which object 0 reaches `target_omega` under the configured trap
/// drive. Omega scales as 1/w0 exactly, so one evaluation fixes the root.
double calibrate_mode_waist(const SystemConfig& cfg, double target_omega);

SystemRates normalize(const DerivedParams& p, const DriveSpec& drive);

}  // namespace optoent
