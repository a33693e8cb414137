#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "optoent/model.hpp"

namespace optoent::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = g(rng);
  return m;
}

/// Random Hurwitz matrix: a Gaussian matrix shifted so max Re(lambda) = -margin.
inline Eigen::MatrixXd random_stable(std::mt19937_64& rng, Eigen::Index n, double margin) {
  Eigen::MatrixXd A = random_matrix(rng, n);
  const Eigen::VectorXcd ev = A.eigenvalues();
  double top = ev.real().maxCoeff();
  return A - (top + margin) * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd B(n, rank);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < rank; ++c) B(r, c) = g(rng);
  return B * B.transpose();
}

/// Random two-mode symplectic matrix built from squeezers, phase rotations
/// and beam splitters in (x1, p1, x2, p2) ordering.
inline Eigen::Matrix4d random_symplectic(std::mt19937_64& rng, int layers = 3) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> squeeze(-0.8, 0.8);
  Eigen::Matrix4d S = Eigen::Matrix4d::Identity();
  for (int l = 0; l < layers; ++l) {
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (int m = 0; m < 2; ++m) {
      const double th = angle(rng);
      const double r = squeeze(rng);
      Eigen::Matrix2d rot;
      rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
      const Eigen::Matrix2d sq = Eigen::Vector2d(std::exp(r), std::exp(-r)).asDiagonal();
      local.block<2, 2>(2 * m, 2 * m) = sq * rot;
    }
    const double phi = angle(rng);
    Eigen::Matrix4d bs;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    bs << c, 0, s, 0,
          0, c, 0, s,
          -s, 0, c, 0,
          0, -s, 0, c;
    S = bs * local * S;
  }
  return S;
}

/// Physical covariance: a symplectic image of a thermal state.
inline Eigen::Matrix4d random_physical(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> occ(0.0, 2.0);
  const double nu1 = 0.5 + occ(rng);
  const double nu2 = 0.5 + occ(rng);
  const Eigen::Matrix4d thermal = Eigen::Vector4d(nu1, nu1, nu2, nu2).asDiagonal();
  const Eigen::Matrix4d S = random_symplectic(rng);
  return S * thermal * S.transpose();
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// Vec-form reference solution of A V + V A^T + D = 0.
inline Eigen::MatrixXd kronecker_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd K = kron(I, A) + kron(A, I);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(D.data(), n * n);
  const Eigen::VectorXd v = K.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
}

/// Reference silica microdisk pair used across the suites.
inline SystemConfig microdisk_config(double control_rel = 0.1, double mod_rel = 0.0) {
  SystemConfig cfg;
  for (auto& o : cfg.objects) {
    o.kind = ObjectKind::microdisk;
    o.diameter = 20e-6;
    o.thickness = 150e-9;
    o.density = 2201.0;
    o.relative_permittivity = 2.1;
    o.mechanical_quality = 1e6;
  }
  const double q = M_PI / 4.0;
  cfg.cavity.phases = {{{q, q}, {q, -q}}};
  const double kappa0 = cavity_linewidth(cfg.cavity.finesse_eff[0], cfg.cavity.length);
  cfg.drive.trap.cw_amplitude = amplitude_from_power(15e-3, kappa0, cfg.cavity.angular_frequency(0));
  const DerivedParams p = derive_params(cfg);
  for (auto& c : cfg.drive.control) {
    c.cw_amplitude = control_rel * cfg.drive.trap.cw_amplitude;
    c.detuning = p.omega[0];
  }
  cfg.drive.control[1].mod_amplitude = mod_rel * cfg.drive.trap.cw_amplitude;
  cfg.drive.mod_frequency = mod_rel > 0.0 ? p.omega[0] + p.omega[1] : 0.0;
  return cfg;
}

inline SystemRates microdisk_rates(double control_rel = 0.1, double mod_rel = 0.0) {
  const SystemConfig cfg = microdisk_config(control_rel, mod_rel);
  return normalize(derive_params(cfg), cfg.drive);
}

}  // namespace optoent::testing
