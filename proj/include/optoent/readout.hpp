#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace optoent {

/// Two probe modes coupled quadratically to the objects. The + mode holds
/// both objects at its nodes, the - mode at opposite slopes. Rates share one
/// unit (rad/s or model units).
struct ProbeSpec {
  double kappa = 0.0;
  double coupling_plus = 0.0;   // effective quadratic coupling of the + mode
  double coupling_minus = 0.0;  // same for the - mode
  std::array<double, 2> mean_x{};  // classical positions <x_1>, <x_2>
  double omega = 1.0;              // mechanical frequency the probes resonate with
  double detuning_plus = 1.0;
  double detuning_minus = -1.0;
  bool enforce_sidebands = true;   // require detuning_pm = +/- omega

  /// Throws ConfigError when kappa / |coupling| < 10 or the sideband
  /// condition fails.
  void validate() const;
};

/// Rows (X+, Y+, X-, Y-) of the output quadratures in terms of (x1, p1, x2, p2).
Eigen::Matrix4d output_map(const ProbeSpec& probe);

/// Symmetrized output moments M V M^T + 1/2, rows (X+, Y+, X-, Y-).
Eigen::Matrix4d output_observables(const Eigen::Matrix4d& V_mech, const ProbeSpec& probe);

/// Linear map from the 10 upper-triangle entries of V_mech to those of the
/// noise-subtracted output moments (both column-major upper triangles).
Eigen::Matrix<double, 10, 10> moment_map(const ProbeSpec& probe);

/// Labels such as "V(x1,p2)" for the upper-triangle entries in moment_map order.
std::vector<std::string> moment_labels();

/// Thrown when some mechanical entries cannot be recovered from the outputs.
class UnidentifiableError : public std::domain_error {
 public:
  UnidentifiableError(const std::string& what, std::vector<std::string> entries)
      : std::domain_error(what), entries_(std::move(entries)) {}
  const std::vector<std::string>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::string> entries_;
};

struct Reconstruction {
  Eigen::Matrix4d V = Eigen::Matrix4d::Zero();
  double condition_number = 0.0;
  double residual = 0.0;  // relative misfit of the least-squares solve
};

/// Least-squares inversion of output_observables. Throws UnidentifiableError
/// naming the entries in the null space of the map.
Reconstruction reconstruct_mech_cov(const Eigen::Matrix4d& output_moments, const ProbeSpec& probe);

}  // namespace optoent
