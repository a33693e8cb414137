#include <cmath>
#include <random>

#include <doctest.h>

#include "optoent/constants.hpp"
#include "optoent/dynamics.hpp"
#include "optoent/errors.hpp"
#include "optoent/gaussian.hpp"
#include "support.hpp"

using namespace optoent;

TEST_CASE("Schur Lyapunov solve matches the Kronecker oracle") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd A = testing::random_stable(rng, 8, 0.05 + 0.01 * trial);
    const Eigen::MatrixXd D = testing::random_psd(rng, 8, 3);
    const Eigen::MatrixXd V = lyapunov_steady(A, D);
    const Eigen::MatrixXd ref = testing::kronecker_lyapunov(A, D);
    CHECK((V - ref).norm() <= 1e-9 * ref.norm());
    CHECK(lyapunov_residual(A, V, D) < 1e-10);
  }
}

TEST_CASE("Lyapunov solve refuses unstable drift") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4) * 0.1;
  CHECK_THROWS_AS(lyapunov_steady(A, Eigen::MatrixXd::Identity(4, 4)), UnstableError);
  CHECK_THROWS_AS(lyapunov_steady(A, Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("characteristic polynomial of known matrices") {
  Eigen::MatrixXd A(3, 3);
  A << -1, 0, 0,
       0, -2, 0,
       0, 0, -3;
  const auto c = characteristic_polynomial(A);
  REQUIRE(c.size() == 4);
  CHECK(static_cast<double>(c[0]) == doctest::Approx(1.0));
  CHECK(static_cast<double>(c[1]) == doctest::Approx(6.0));
  CHECK(static_cast<double>(c[2]) == doctest::Approx(11.0));
  CHECK(static_cast<double>(c[3]) == doctest::Approx(6.0));
  CHECK(routh_hurwitz_stable(c));
  CHECK_FALSE(routh_hurwitz_stable({1.0L, -1.0L, 2.0L}));
  // s^3 + s^2 + s + 2 has a right-half-plane pair.
  CHECK_FALSE(routh_hurwitz_stable({1.0L, 1.0L, 1.0L, 2.0L}));
}

TEST_CASE("Routh-Hurwitz agrees with eigenvalue signs on random drift") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shift(0.0, 4.0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXd A = testing::random_matrix(rng, 8) - shift(rng) * Eigen::MatrixXd::Identity(8, 8);
    const StabilityReport r = stability_check(A);
    if (r.verdict == Verdict::marginal) continue;
    CHECK(r.routh_hurwitz == (r.margin > 0.0));
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("marginal drift is flagged") {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1,
       -1, 0;
  CHECK(stability_check(A).verdict == Verdict::marginal);
}

TEST_CASE("drift sparsity and signs") {
  const SystemRates r = testing::microdisk_rates(0.1);
  const WorkingPoint wp = steady_means(r).point;
  const Mat8 A = build_drift(wp, r);
  CHECK(A(0, 1) == doctest::Approx(r.omega[0]));
  CHECK(A(1, 0) == doctest::Approx(-wp.omega_eff[0]));
  CHECK(A(4, 4) == doctest::Approx(-r.kappa[0]));
  CHECK(A(4, 5) == doctest::Approx(wp.detuning[0]));
  CHECK(A(5, 4) == doctest::Approx(-wp.detuning[0]));
  // Positions never feed each other directly, nor do cavity modes.
  CHECK(A(0, 2) == 0.0);
  CHECK(A(4, 6) == 0.0);
  CHECK(A(1, 4) == doctest::Approx(-std::sqrt(2.0) * wp.coupling(0, 0).real()));
  CHECK(A(5, 0) == doctest::Approx(-std::sqrt(2.0) * wp.coupling(0, 0).real()));
}

TEST_CASE("uncoupled oscillator thermalizes to its bath") {
  SystemRates r;
  r.omega = {1.0, 1.3};
  r.gamma = {0.02, 0.05};
  r.nbar_th = {3.0, 0.5};
  r.kappa = {0.4, 0.4};
  WorkingPoint wp;
  wp.omega_eff = {1.0, 1.3};
  wp.detuning = {0.5, 0.5};
  const Mat8 V = lyapunov_steady(build_drift(wp, r), build_diffusion(r));
  CHECK(phonon_occupation(V, 0) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(phonon_occupation(V, 1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(V(4, 4) == doctest::Approx(0.5));
}

TEST_CASE("high-temperature diffusion approaches the exact form") {
  SystemRates r;
  r.gamma = {1e-6, 1e-6};
  r.recoil = {2e-6, 2e-6};
  r.nbar_th = {188.9, 188.9};
  r.thermal_ratio = {std::log1p(1.0 / 188.9), std::log1p(1.0 / 188.9)};
  r.kappa = {0.01, 0.01};
  const Mat8 exact = build_diffusion(r, DiffusionForm::exact);
  const Mat8 high = build_diffusion(r, DiffusionForm::high_temperature);
  CHECK(high(1, 1) == doctest::Approx(exact(1, 1)).epsilon(1e-5));
  CHECK(exact(1, 1) == doctest::Approx((2.0 * 188.9 + 1.0) * 3e-6));
  CHECK(exact(0, 0) == 0.0);
  CHECK(exact(5, 5) == doctest::Approx(0.01));
}

TEST_CASE("constant-drift evolution relaxes to the Lyapunov state") {
  const SystemRates r = testing::microdisk_rates(0.1);
  const WorkingPoint wp = steady_means(r).point;
  const Mat8 A = build_drift(wp, r);
  const Mat8 D = build_diffusion(r);
  const Mat8 Vs = lyapunov_steady(A, D);
  CHECK(lyapunov_residual(A, Vs, D) < 1e-10);
  EvolveOptions o;
  o.t_end = 3000.0;
  o.dt = 0.01;
  o.stride = 1000;
  const auto traj = evolve_covariance(Mat8::Identity() * 0.5, [&](double) { return A; }, D, o);
  CHECK((traj.back().V - Vs).norm() < 1e-6 * Vs.norm());
  // Steady state is a fixed point of the integrator.
  o.t_end = 10.0;
  const auto stay = evolve_covariance(Vs, [&](double) { return A; }, D, o);
  CHECK((stay.back().V - Vs).norm() < 1e-9 * Vs.norm());
}

TEST_CASE("blow-up of an unstable trajectory is detected") {
  Mat8 A = Mat8::Identity() * 0.5;
  EvolveOptions o;
  o.t_end = 100.0;
  o.dt = 0.01;
  CHECK_THROWS_AS(evolve_covariance(Mat8::Identity(), [&](double) { return A; }, Mat8::Zero(), o), UnstableError);
}

TEST_CASE("Floquet integration converges at fourth order") {
  const SystemRates r = testing::microdisk_rates(0.1, 0.09);
  const SteadyMeans start = steady_means(r);
  const Mat8 D = build_diffusion(r);
  const Mat8 V0 = lyapunov_steady(build_drift(start.point, r), D);
  const double period = constants::two_pi / r.drive_frequency;
  auto run = [&](int n) {
    MeanFieldPropagator means(r, start, 0.5 * period / n);
    EvolveOptions o;
    o.dt = period / n;
    o.t_end = 3.0 * period;
    o.stride = static_cast<std::size_t>(n);
    return evolve_covariance(V0, drift_schedule(means), D, o).back().V;
  };
  const Mat8 a = run(25);
  const Mat8 b = run(50);
  const Mat8 c = run(100);
  const double ratio = (a - b).norm() / (b - c).norm();
  CHECK(ratio >= 7.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("quasi-steady orbit bookkeeping") {
  std::vector<CovarianceSample> traj;
  for (int k = 0; k <= 40; ++k) traj.push_back({k * constants::pi / 10.0, Mat8::Identity()});
  const QuasiSteadyOrbit orbit = quasi_steady_orbit(traj, 1.0);
  CHECK(orbit.converged);
  CHECK(orbit.period.size() == 20);
  CHECK(orbit.change == 0.0);
  CHECK_THROWS_AS(quasi_steady_orbit(traj, 1.1), std::invalid_argument);
  traj.resize(30);
  CHECK_FALSE(quasi_steady_orbit(traj, 1.0).converged);
}
