#include "optoent/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace optoent {

Eigen::Matrix4d mechanical_block(const Eigen::MatrixXd& V) {
  if (V.rows() < 4 || V.cols() < 4) throw std::invalid_argument("mechanical_block: need at least 4x4");
  return V.topLeftCorner<4, 4>();
}

Eigen::MatrixXd mode_block(const Eigen::MatrixXd& V, const std::vector<int>& modes) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXd out(2 * n, 2 * n);
  for (Eigen::Index a = 0; a < 2 * n; ++a) {
    for (Eigen::Index b = 0; b < 2 * n; ++b) {
      const Eigen::Index ra = 2 * modes[static_cast<std::size_t>(a / 2)] + a % 2;
      const Eigen::Index rb = 2 * modes[static_cast<std::size_t>(b / 2)] + b % 2;
      if (ra >= V.rows() || rb >= V.cols() || ra < 0 || rb < 0) throw std::out_of_range("mode_block: bad mode");
      out(a, b) = V(ra, rb);
    }
  }
  return out;
}

Eigen::Matrix4d partial_transpose(const Eigen::Matrix4d& V, int party) {
  if (party != 1 && party != 2) throw std::invalid_argument("partial_transpose: party must be 1 or 2");
  Eigen::Vector4d d(1.0, 1.0, 1.0, 1.0);
  d(party == 1 ? 1 : 3) = -1.0;
  return d.asDiagonal() * V * d.asDiagonal();
}

Eigen::MatrixXd symplectic_form(Eigen::Index modes) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    S(2 * k, 2 * k + 1) = 1.0;
    S(2 * k + 1, 2 * k) = -1.0;
  }
  return S;
}

std::vector<double> symplectic_spectrum(const Eigen::MatrixXd& V) {
  const Eigen::Index dim = V.rows();
  if (dim == 0 || dim != V.cols() || dim % 2 != 0) {
    throw std::invalid_argument("symplectic_spectrum: need a square matrix of even dimension");
  }
  const double scale = V.norm();
  if (!std::isfinite(scale) || (V - V.transpose()).norm() > 1e-9 * scale) {
    throw std::invalid_argument("symplectic_spectrum: covariance matrix is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (V + V.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("symplectic_spectrum: covariance matrix is not positive definite");
  }
  // L^T Sigma L is antisymmetric and similar to Sigma V, so i L^T Sigma L is
  // Hermitian with eigenvalues +/- nu_k.
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd M = L.transpose() * symplectic_form(dim / 2) * L;
  const Eigen::MatrixXcd H = std::complex<double>(0.0, 1.0) * M.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const Eigen::Index n = dim / 2;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double pos = ev(n + k);
    const double neg = -ev(n - 1 - k);
    if (std::abs(pos - neg) > 1e-9 * std::max(1.0, pos)) {
      throw std::runtime_error("symplectic_spectrum: eigenvalues failed to pair");
    }
    out[static_cast<std::size_t>(k)] = 0.5 * (pos + neg);
  }
  return out;
}

double eta_min(const Eigen::Matrix4d& V) { return symplectic_spectrum(partial_transpose(V, 2)).front(); }

double log_negativity_from_eta(double eta, LogBase base) {
  const double e = std::max(0.0, -std::log(2.0 * eta));
  return base == LogBase::natural ? e : e / std::log(2.0);
}

double log_negativity(const Eigen::Matrix4d& V, LogBase base) { return log_negativity_from_eta(eta_min(V), base); }

double phonon_occupation(const Eigen::MatrixXd& V, int mode) {
  const Eigen::Index x = 2 * mode;
  return 0.5 * (V(x, x) + V(x + 1, x + 1) - 1.0);
}

EntanglementReport entanglement_report(const Eigen::MatrixXd& V, double t, LogBase base) {
  EntanglementReport r;
  const Eigen::Matrix4d m = mechanical_block(V);
  r.t = t;
  r.eta_min = eta_min(m);
  r.log_negativity = log_negativity_from_eta(r.eta_min, base);
  r.nbar1 = phonon_occupation(m, 0);
  r.nbar2 = phonon_occupation(m, 1);
  return r;
}

Eigen::Matrix4d two_mode_squeezed_vacuum(double r) {
  const double c = 0.5 * std::cosh(2.0 * r);
  const double s = 0.5 * std::sinh(2.0 * r);
  Eigen::Matrix4d V;
  V << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return V;
}

}  // namespace optoent
