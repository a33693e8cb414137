#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "optoent/errors.hpp"
#include "optoent/gaussian.hpp"
#include "optoent/readout.hpp"
#include "support.hpp"

using namespace optoent;

namespace {

ProbeSpec probe(double x1, double x2) {
  ProbeSpec p;
  p.kappa = 1.0;
  p.coupling_plus = 0.08;
  p.coupling_minus = 0.06;
  p.mean_x = {x1, x2};
  return p;
}

}  // namespace

TEST_CASE("vacuum output when the probes decouple") {
  ProbeSpec p = probe(1.0, 1.0);
  p.coupling_plus = p.coupling_minus = 0.0;
  const Eigen::Matrix4d out = output_observables(0.5 * Eigen::Matrix4d::Identity(), p);
  CHECK(out.isApprox(0.5 * Eigen::Matrix4d::Identity()));
}

TEST_CASE("object 2 at zero position drops out") {
  std::mt19937_64 rng(3);
  const Eigen::Matrix4d V = testing::random_physical(rng);
  const ProbeSpec p = probe(1.3, 0.0);
  const Eigen::Matrix4d M = output_map(p);
  CHECK(M.col(2).norm() == 0.0);
  CHECK(M.col(3).norm() == 0.0);
  Eigen::Matrix4d W = V;
  W.block<2, 2>(2, 2) *= 3.0;
  W.block<2, 2>(0, 2).setZero();
  W.block<2, 2>(2, 0).setZero();
  CHECK(output_observables(V, p).isApprox(output_observables(W, p)));
}

TEST_CASE("two-mode squeezed input matches the analytic map") {
  const double r = 0.4;
  const Eigen::Matrix4d V = two_mode_squeezed_vacuum(r);
  const ProbeSpec p = probe(0.9, 1.1);
  const Eigen::Matrix4d out = output_observables(V, p);
  const double cp = std::sqrt(2.0) * 0.08;
  const double cm = std::sqrt(2.0) * 0.06;
  const double ch = 0.5 * std::cosh(2.0 * r);
  const double sh = 0.5 * std::sinh(2.0 * r);
  // X+ = cp (x1 p1 + x2 p2) with <p1 p2> = -sh.
  CHECK(out(0, 0) == doctest::Approx(cp * cp * (0.81 * ch + 1.21 * ch - 2.0 * 0.99 * sh) + 0.5));
  // Y+ / Y- cross moment: cp cm (x1^2 <x1x1> - x2^2 <x2x2>).
  CHECK(out(1, 3) == doctest::Approx(cp * cm * (0.81 * ch - 1.21 * ch)));
  CHECK(out(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("round trip on random physical covariances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Matrix4d V = testing::random_physical(rng);
    const ProbeSpec p = probe(pos(rng), -pos(rng));
    const Reconstruction rec = reconstruct_mech_cov(output_observables(V, p), p);
    CHECK((rec.V - V).norm() <= 1e-9 * V.norm());
    CHECK(rec.residual < 1e-9);
    CHECK(rec.condition_number >= 1.0);
  }
}

TEST_CASE("vacuum round trip") {
  const ProbeSpec p = probe(1.0, 1.0);
  const Eigen::Matrix4d vac = 0.5 * Eigen::Matrix4d::Identity();
  CHECK(reconstruct_mech_cov(output_observables(vac, p), p).V.isApprox(vac, 1e-10));
}

TEST_CASE("unidentifiable entries are named") {
  const ProbeSpec p = probe(0.0, 1.0);
  try {
    reconstruct_mech_cov(0.5 * Eigen::Matrix4d::Identity(), p);
    FAIL("expected an error");
  } catch (const UnidentifiableError& e) {
    const auto& names = e.entries();
    CHECK(std::find(names.begin(), names.end(), "V(x1,x1)") != names.end());
    CHECK(std::find(names.begin(), names.end(), "V(p1,p2)") != names.end());
    CHECK(std::find(names.begin(), names.end(), "V(x2,x2)") == names.end());
  }
}

TEST_CASE("probe validation") {
  ProbeSpec p = probe(1.0, 1.0);
  p.coupling_plus = 0.2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = probe(1.0, 1.0);
  p.detuning_minus = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.enforce_sidebands = false;
  CHECK_NOTHROW(p.validate());
  p.kappa = 0.0;
  CHECK_THROWS_AS(output_map(p), ConfigError);
}

TEST_CASE("conditioning degrades as the positions become unbalanced") {
  const Eigen::Matrix4d vac = 0.5 * Eigen::Matrix4d::Identity();
  double last = 0.0;
  for (double ratio : {1.0, 2.0, 4.0, 8.0}) {
    const ProbeSpec p = probe(ratio, 1.0);
    const double c = reconstruct_mech_cov(output_observables(vac, p), p).condition_number;
    CHECK(c > last);
    last = c;
  }
}

TEST_CASE("moment labels cover the upper triangle") {
  const auto labels = moment_labels();
  REQUIRE(labels.size() == 10);
  CHECK(labels.front() == "V(x1,x1)");
  CHECK(labels.back() == "V(p2,p2)");
}
