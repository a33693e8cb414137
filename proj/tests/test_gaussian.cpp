#include <cmath>
#include <random>

#include <doctest.h>

#include "optoent/gaussian.hpp"
#include "support.hpp"

using namespace optoent;

TEST_CASE("two-mode squeezed vacuum oracle") {
  for (double r : {0.1, 0.5, 1.0}) {
    const Eigen::Matrix4d V = two_mode_squeezed_vacuum(r);
    CHECK(std::abs(eta_min(V) - 0.5 * std::exp(-2.0 * r)) < 1e-12);
    CHECK(std::abs(log_negativity(V) - 2.0 * r) < 1e-9);
    CHECK(std::abs(log_negativity(V, LogBase::two) - 2.0 * r / std::log(2.0)) < 1e-9);
    const auto nu = symplectic_spectrum(V);
    CHECK(nu[0] == doctest::Approx(0.5));
    CHECK(nu[1] == doctest::Approx(0.5));
  }
}

TEST_CASE("vacuum and thermal states are separable") {
  const Eigen::Matrix4d vac = 0.5 * Eigen::Matrix4d::Identity();
  CHECK(eta_min(vac) == doctest::Approx(0.5));
  CHECK(log_negativity(vac) == 0.0);
  const Eigen::Matrix4d th = Eigen::Vector4d(2.5, 2.5, 0.7, 0.7).asDiagonal();
  const auto nu = symplectic_spectrum(th);
  CHECK(nu[0] == doctest::Approx(0.7));
  CHECK(nu[1] == doctest::Approx(2.5));
  CHECK(phonon_occupation(th, 0) == doctest::Approx(2.0));
}

TEST_CASE("physical random states keep symplectic eigenvalues above one half") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Matrix4d V = testing::random_physical(rng);
    CHECK(symplectic_spectrum(V).front() >= 0.5 - 1e-9);
  }
}

TEST_CASE("local symplectic transformations leave eta_min unchanged") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Matrix4d V = testing::random_physical(rng);
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int m = 0; m < 2; ++m) {
      Eigen::Matrix2d s;
      s << u(rng), u(rng), u(rng), u(rng);
      s /= std::sqrt(std::abs(s.determinant()));
      if (s.determinant() < 0.0) s.row(0) *= -1.0;
      L.block<2, 2>(2 * m, 2 * m) = s;
    }
    const Eigen::Matrix4d W = L * V * L.transpose();
    CHECK(eta_min(W) == doctest::Approx(eta_min(V)).epsilon(1e-9));
  }
}

TEST_CASE("label swap and choice of transposed party") {
  std::mt19937_64 rng(11);
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
  P(0, 2) = P(1, 3) = P(2, 0) = P(3, 1) = 1.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix4d V = testing::random_physical(rng);
    CHECK(eta_min(P * V * P.transpose()) == doctest::Approx(eta_min(V)).epsilon(1e-10));
    CHECK(symplectic_spectrum(partial_transpose(V, 1)).front() ==
          doctest::Approx(symplectic_spectrum(partial_transpose(V, 2)).front()).epsilon(1e-10));
  }
}

TEST_CASE("invalid covariance input") {
  Eigen::Matrix4d V = 0.5 * Eigen::Matrix4d::Identity();
  V(0, 1) = 0.3;
  CHECK_THROWS_AS(symplectic_spectrum(V), std::invalid_argument);
  CHECK_THROWS_AS(symplectic_spectrum(-Eigen::Matrix4d::Identity()), std::invalid_argument);
  CHECK_THROWS_AS(symplectic_spectrum(Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(partial_transpose(V, 3), std::invalid_argument);
}

TEST_CASE("mode blocks of an 8x8 covariance") {
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(8, 8) * 0.5;
  V.topLeftCorner<4, 4>() = two_mode_squeezed_vacuum(0.3);
  const auto rep = entanglement_report(V, 2.0);
  CHECK(rep.t == 2.0);
  CHECK(rep.log_negativity == doctest::Approx(0.6));
  const Eigen::MatrixXd cav = mode_block(V, {2, 3});
  CHECK(cav.isApprox(0.5 * Eigen::MatrixXd::Identity(4, 4)));
  CHECK(symplectic_spectrum(V).size() == 4);
}
