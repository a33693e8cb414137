#include "optoent/readout.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "optoent/errors.hpp"

namespace optoent {

namespace {

constexpr std::array<const char*, 4> kQuadrature{"x1", "p1", "x2", "p2"};

// Column-major upper triangle, (r, c) with r <= c.
std::array<std::pair<int, int>, 10> upper_entries() {
  std::array<std::pair<int, int>, 10> out{};
  int k = 0;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r <= c; ++r) out[static_cast<std::size_t>(k++)] = {r, c};
  return out;
}

}  // namespace

void ProbeSpec::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("probe: kappa must be > 0");
  for (double g : {coupling_plus, coupling_minus}) {
    if (!std::isfinite(g)) throw ConfigError("probe: coupling must be finite");
    if (g != 0.0 && kappa / std::abs(g) < 10.0) {
      throw ConfigError(fmt::format("probe: adiabaticity requires kappa / |G| >= 10, got {:.3g}", kappa / std::abs(g)));
    }
  }
  if (enforce_sidebands) {
    const double tol = 1e-9 * std::max(std::abs(omega), 1.0);
    if (std::abs(detuning_plus - omega) > tol || std::abs(detuning_minus + omega) > tol) {
      throw ConfigError("probe: detunings must equal +omega and -omega");
    }
  }
}

Eigen::Matrix4d output_map(const ProbeSpec& probe) {
  probe.validate();
  const double cp = std::sqrt(2.0 / probe.kappa) * probe.coupling_plus;
  const double cm = std::sqrt(2.0 / probe.kappa) * probe.coupling_minus;
  const double x1 = probe.mean_x[0];
  const double x2 = probe.mean_x[1];
  Eigen::Matrix4d M;
  M << 0.0, cp * x1, 0.0, cp * x2,
       -cp * x1, 0.0, -cp * x2, 0.0,
       0.0, -cm * x1, 0.0, cm * x2,
       -cm * x1, 0.0, cm * x2, 0.0;
  return M;
}

Eigen::Matrix4d output_observables(const Eigen::Matrix4d& V_mech, const ProbeSpec& probe) {
  const Eigen::Matrix4d M = output_map(probe);
  Eigen::Matrix4d out = M * V_mech * M.transpose() + 0.5 * Eigen::Matrix4d::Identity();
  return 0.5 * (out + out.transpose());
}

Eigen::Matrix<double, 10, 10> moment_map(const ProbeSpec& probe) {
  const Eigen::Matrix4d M = output_map(probe);
  const auto idx = upper_entries();
  Eigen::Matrix<double, 10, 10> L;
  // Out(a, b) = sum_{r, c} M(a, r) M(b, c) V(r, c); symmetric V counts each
  // off-diagonal pair twice.
  for (std::size_t row = 0; row < 10; ++row) {
    const auto [a, b] = idx[row];
    for (std::size_t col = 0; col < 10; ++col) {
      const auto [r, c] = idx[col];
      double w = M(a, r) * M(b, c);
      if (r != c) w += M(a, c) * M(b, r);
      L(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = w;
    }
  }
  return L;
}

std::vector<std::string> moment_labels() {
  std::vector<std::string> out;
  for (const auto& [r, c] : upper_entries()) {
    out.push_back(fmt::format("V({},{})", kQuadrature[static_cast<std::size_t>(r)],
                              kQuadrature[static_cast<std::size_t>(c)]));
  }
  return out;
}

Reconstruction reconstruct_mech_cov(const Eigen::Matrix4d& output_moments, const ProbeSpec& probe) {
  const Eigen::Matrix<double, 10, 10> L = moment_map(probe);
  const auto idx = upper_entries();
  Eigen::JacobiSVD<Eigen::Matrix<double, 10, 10>> svd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double cutoff = 1e-12 * std::max(smax, 1e-300);

  std::vector<std::string> lost;
  const auto labels = moment_labels();
  for (Eigen::Index k = 0; k < 10; ++k) {
    if (s(k) > cutoff) continue;
    for (Eigen::Index e = 0; e < 10; ++e) {
      const auto& name = labels[static_cast<std::size_t>(e)];
      if (std::abs(svd.matrixV()(e, k)) > 1e-8 && std::find(lost.begin(), lost.end(), name) == lost.end()) {
        lost.push_back(name);
      }
    }
  }
  if (!lost.empty()) {
    std::string list;
    for (const auto& n : lost) list += (list.empty() ? "" : ", ") + n;
    throw UnidentifiableError("reconstruct_mech_cov: unidentifiable entries: " + list, lost);
  }

  Eigen::Matrix<double, 10, 1> rhs;
  const Eigen::Matrix4d signal = output_moments - 0.5 * Eigen::Matrix4d::Identity();
  for (std::size_t k = 0; k < 10; ++k) rhs(static_cast<Eigen::Index>(k)) = signal(idx[k].first, idx[k].second);
  const Eigen::Matrix<double, 10, 1> v = svd.solve(rhs);

  Reconstruction out;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto [r, c] = idx[k];
    out.V(r, c) = out.V(c, r) = v(static_cast<Eigen::Index>(k));
  }
  out.condition_number = smax / s(9);
  const double scale = rhs.norm();
  out.residual = scale > 0.0 ? (L * v - rhs).norm() / scale : (L * v - rhs).norm();
  return out;
}

}  // namespace optoent
