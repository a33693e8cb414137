#pragma once

#include <vector>

#include <Eigen/Dense>

namespace optoent {

/// Entanglement summary of one covariance matrix.
struct EntanglementReport {
  double t = 0.0;
  double eta_min = 0.0;
  double log_negativity = 0.0;
  double nbar1 = 0.0;
  double nbar2 = 0.0;
  bool stable = true;
};

enum class LogBase { natural, two };

/// Rows/cols (x1, p1, x2, p2). A 4x4 input is returned unchanged.
Eigen::Matrix4d mechanical_block(const Eigen::MatrixXd& V);

/// Covariance of the listed modes (mode k occupies rows 2k, 2k+1).
Eigen::MatrixXd mode_block(const Eigen::MatrixXd& V, const std::vector<int>& modes);

/// Momentum sign flip of party 1 or 2: V -> P V P.
Eigen::Matrix4d partial_transpose(const Eigen::Matrix4d& V, int party = 2);

/// Symplectic form for (x1, p1, ..., xn, pn) ordering.
Eigen::MatrixXd symplectic_form(Eigen::Index modes);

/// Ascending symplectic eigenvalues (n values for a 2n x 2n matrix). Throws
/// std::invalid_argument on non-symmetric or non-positive-definite input.
std::vector<double> symplectic_spectrum(const Eigen::MatrixXd& V);

double eta_min(const Eigen::Matrix4d& V);
double log_negativity(const Eigen::Matrix4d& V, LogBase base = LogBase::natural);
double log_negativity_from_eta(double eta, LogBase base = LogBase::natural);

/// (<x_j^2> + <p_j^2> - 1) / 2 for mode j (0-based).
double phonon_occupation(const Eigen::MatrixXd& V, int mode);

/// Mechanical entanglement summary of a full (8x8) or mechanical (4x4) covariance.
EntanglementReport entanglement_report(const Eigen::MatrixXd& V, double t = 0.0, LogBase base = LogBase::natural);

/// Two-mode squeezed vacuum with squeezing r in (x1, p1, x2, p2) ordering.
Eigen::Matrix4d two_mode_squeezed_vacuum(double r);

}  // namespace optoent
