#include <cmath>
#include <complex>

#include <doctest.h>

#include "optoent/constants.hpp"
#include "optoent/errors.hpp"
#include "optoent/meanfield.hpp"
#include "support.hpp"

using namespace optoent;

namespace {

SystemRates lorentzian_rates() {
  SystemRates r;
  r.kappa = {0.3, 0.5};
  r.detuning = {0.7, -0.4};
  r.drive_cw = {2.0, 1.5};
  r.gamma = {1e-3, 1e-3};
  return r;
}

}  // namespace

TEST_CASE("uncoupled cavity fixed point is the driven Lorentzian") {
  const SystemRates r = lorentzian_rates();
  const SteadyMeans s = steady_means(r);
  for (std::size_t i = 0; i < 2; ++i) {
    const cplx expect = r.drive_cw[i] / cplx(r.kappa[i], r.detuning[i]);
    CHECK(std::abs(s.point.means.a[i] - expect) < 1e-8 * std::abs(expect));
    CHECK(s.point.means.x[i] == 0.0);
  }
}

TEST_CASE("fixed point agrees with forward integration") {
  const SystemRates r = testing::microdisk_rates(0.1);
  const SteadyMeans s = steady_means(r);
  CHECK(s.residual < 1e-10);
  CHECK(steady_residual(r, s.point.means, s.bare_detuning) < 1e-10);
  // Effective convention: the working point sits at the requested Delta.
  CHECK(s.point.detuning[0] == doctest::Approx(1.0).epsilon(1e-10));

  // Kick the means off the fixed point and let the damped dynamics return.
  SteadyMeans kicked = s;
  kicked.point.means.x[0] += 0.5;
  kicked.point.means.a[1] *= 1.01;
  const double h = max_step(r, s.point);
  MeanFieldPropagator prop(r, kicked, h);
  const double t_end = std::ceil(6000.0 / h) * h;
  const WorkingPoint late = prop.at(t_end);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(late.means.x[j] == doctest::Approx(s.point.means.x[j]).epsilon(1e-6));
    CHECK(std::abs(late.means.a[j] - s.point.means.a[j]) < 1e-6 * std::abs(s.point.means.a[j]));
  }
}

TEST_CASE("effective quantities follow the coupling definitions") {
  const SystemRates r = testing::microdisk_rates(0.1);
  const WorkingPoint wp = steady_means(r).point;
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      const cplx expect = wp.means.a[static_cast<std::size_t>(i)] *
                          (r.g_lin(i, j) + 2.0 * r.g_quad(i, j) * wp.means.x[static_cast<std::size_t>(j)]);
      CHECK(std::abs(wp.coupling(i, j) - expect) <= 1e-12 * std::abs(expect));
    }
  }
  double shift = 0.0;
  for (std::size_t i = 0; i < 2; ++i) shift += 2.0 * std::norm(wp.means.a[i]) * r.g_quad(static_cast<Eigen::Index>(i), 0);
  CHECK(wp.omega_eff[0] == doctest::Approx(1.0 + shift));
}

TEST_CASE("propagator rejects off-grid and backward queries") {
  const SystemRates r = testing::microdisk_rates(0.1);
  MeanFieldPropagator prop(r, steady_means(r), 0.01);
  CHECK_NOTHROW(prop.at(0.05));
  CHECK_THROWS_AS(prop.at(0.055), std::logic_error);
  CHECK_THROWS_AS(prop.at(0.01), std::logic_error);
  CHECK_THROWS_AS(MeanFieldPropagator(r, steady_means(r), 0.0), ConfigError);
}

TEST_CASE("step rule and step-halving guard") {
  const SystemRates r = testing::microdisk_rates(0.1, 0.09);
  const WorkingPoint wp = steady_means(r).point;
  const double h = max_step(r, wp);
  CHECK(h == doctest::Approx(constants::two_pi / (200.0 * 2.0)));
  CHECK_THROWS_AS(integrate_means(r, 1.0, 2.0 * h), ConvergenceError);
  const auto pts = integrate_means(r, 10.0 * h, h, MeanFieldMode::ode, 5);
  CHECK(pts.size() == 3);
}

TEST_CASE("periodic orbit repeats after one drive period") {
  const SystemRates r = testing::microdisk_rates(0.1, 0.09);
  const SteadyMeans cw = steady_means(r);
  const double period = constants::two_pi / r.drive_frequency;
  const double h = period / 400.0;
  const SteadyMeans orbit = periodic_means(r, cw, h);
  MeanFieldPropagator prop(r, orbit, h);
  const WorkingPoint a = prop.at(0.0);
  const WorkingPoint b = prop.at(400.0 * h);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(b.means.x[j] - a.means.x[j]) < 1e-8 * std::abs(a.means.x[j]));
    CHECK(std::abs(b.means.a[j] - a.means.a[j]) < 1e-8 * std::abs(a.means.a[j]));
  }
  // Unmodulated: the CW point is returned untouched.
  const SystemRates cw_rates = testing::microdisk_rates(0.1);
  const SteadyMeans same = periodic_means(cw_rates, steady_means(cw_rates), h);
  CHECK(same.point.means.x[0] == steady_means(cw_rates).point.means.x[0]);
}

TEST_CASE("modulated coupling stays close to a single harmonic") {
  const SystemRates r = testing::microdisk_rates(0.1, 0.09);
  const double period = constants::two_pi / r.drive_frequency;
  const int n = 400;
  const double h = period / n;
  const SteadyMeans orbit = periodic_means(r, steady_means(r), h);
  MeanFieldPropagator prop(r, orbit, h);
  std::vector<cplx> g(n);
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = prop.at(k * h).coupling(1, 0);
  // Power outside harmonics 0 and +/-1.
  double total = 0.0;
  double kept = 0.0;
  for (int m = -n / 2; m < n / 2; ++m) {
    cplx c = 0.0;
    for (int k = 0; k < n; ++k) c += g[static_cast<std::size_t>(k)] * std::polar(1.0, -constants::two_pi * m * k / n);
    c /= n;
    total += std::norm(c);
    if (std::abs(m) <= 1) kept += std::norm(c);
  }
  CHECK(std::sqrt((total - kept) / total) < 0.05);
}

TEST_CASE("quasistatic means follow the instantaneous Lorentzian") {
  const SystemRates r = testing::microdisk_rates(0.1, 0.09);
  const SteadyMeans cw = steady_means(r);
  MeanFieldPropagator prop(r, cw, 0.01, MeanFieldMode::quasistatic);
  const WorkingPoint wp = prop.at(0.37);
  const cplx expect = r.drive(1, 0.37) / cplx(r.kappa[1], cw.point.detuning[1]);
  CHECK(std::abs(wp.means.a[1] - expect) < 1e-12 * std::abs(expect));
  CHECK(wp.means.x[0] == cw.point.means.x[0]);
  CHECK(lamb_dicke_excursion(r, wp.means) < 1e-2);
}
