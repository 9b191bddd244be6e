#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "skewsn/flow_adapter.hpp"
#include "skewsn/oracle.hpp"

using namespace skewsn;
using namespace skewsn::flow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Exact solution of x' = a x + b sin(2 pi (theta + rho t)) - k beta.
double linear_exact(double a, double b, double k, double rho, double beta, double theta,
                    double x0, double t) {
  const std::complex<double> c = b / (std::complex<double>(-a, kTwoPi * rho));
  auto particular = [&](double s) {
    return k * beta / a + (c * std::polar(1.0, kTwoPi * (theta + rho * s))).imag();
  };
  return particular(t) + (x0 - particular(0.0)) * std::exp(a * t);
}

}  // namespace

TEST_CASE("linear field with a = -1 over one unit of time") {
  const auto sys = linear_field(-1.0, 0.0, 1.0, 1.0, 0.0);
  const auto r = time_t0_map(sys, 0.3, 0.0, 0.8);
  CHECK(std::abs(r.deriv_x - std::exp(-1.0)) < 1e-10);
  CHECK(std::abs(r.x - ((0.8 + 0.3) * std::exp(-1.0) - 0.3)) < 1e-10);
}

TEST_CASE("forced linear field matches its exact solution") {
  const double a = -0.7, b = 0.4, k = 1.0, rho = golden_mean();
  auto sys = linear_field(a, b, k, 0.9, rho);
  sys.steps = calibrate_steps(sys);
  for (double theta : {0.0, 0.3}) {
    for (double x0 : {-1.0, 0.5}) {
      const auto r = integrate(sys, 0.2, theta, x0, sys.t0, sys.steps);
      CHECK(std::abs(r.x - linear_exact(a, b, k, rho, 0.2, theta, x0, 0.9)) < 1e-10);
      CHECK(std::abs(r.deriv_x - std::exp(a * 0.9)) < 1e-12);
    }
  }
}

TEST_CASE("time-t maps compose as a semigroup") {
  auto sys = quadratic_cap_field(0.5, 0.2, 0.5, golden_mean());
  sys.steps = calibrate_steps(sys);
  const double beta = 0.3, theta = 0.17, x = 1.4;
  const auto one = integrate(sys, beta, theta, x, 0.5, sys.steps);
  const auto two = integrate(sys, beta, wrap_unit(theta + 0.5 * sys.rho_flow), one.x, 0.5, sys.steps);
  const auto whole = integrate(sys, beta, theta, x, 1.0, 2 * sys.steps);
  CHECK(std::abs(two.x - whole.x) < 1e-10);
  CHECK(std::abs(one.deriv_x * two.deriv_x - whole.deriv_x) < 1e-9);
}

TEST_CASE("variational derivative agrees with finite differences") {
  auto sys = quadratic_cap_field(0.5, 0.2, 0.5, golden_mean());
  sys.steps = calibrate_steps(sys);
  for (double x : {0.3, 1.0, 1.8}) {
    const double h = 1e-6;
    const double fd = (integrate(sys, 0.3, 0.4, x + h, 0.5, sys.steps).x -
                       integrate(sys, 0.3, 0.4, x - h, 0.5, sys.steps).x) /
                      (2 * h);
    CHECK(std::abs(integrate(sys, 0.3, 0.4, x, 0.5, sys.steps).deriv_x - fd) < 1e-6);
  }
}

TEST_CASE("step calibration returns a converged power of two") {
  const auto sys = quadratic_cap_field(0.5, 0.2, 0.5, golden_mean());
  const int steps = calibrate_steps(sys);
  CHECK(steps >= 32);
  CHECK((steps & (steps - 1)) == 0);
}

TEST_CASE("induced map of the quadratic cap is a concave family decreasing in beta") {
  const auto fam = as_fibre_family(quadratic_cap_field(0.5, 0.2, 0.5, golden_mean()));
  CHECK(fam.orientation() == Orientation::ConcaveDecreasing);
  const BasePoint th(0.3);
  const double y = fam.eval(0.3, th, 1.2);
  const auto back = fam.inverse(0.3, th, y);
  REQUIRE(back.has_value());
  CHECK(*back == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("frozen flow fibres lose their equilibria where the cap touches zero") {
  // With rho_flow = 0, x' = -(x-1)^2 + c0 + c1 sin(2 pi theta) - beta has equilibria exactly
  // while beta <= c0 + c1 sin(2 pi theta), so the time-t map has its saddle-node there too.
  const double c0 = 0.5, c1 = 0.2;
  const auto fam = as_fibre_family(quadratic_cap_field(c0, c1, 0.5, 0.0));
  for (double theta : {0.1, 0.6}) {
    const auto r = oracle::solve_saddle_node_1d(oracle::frozen_fibre(fam, BasePoint(theta)));
    CHECK(std::abs(r.beta_star - (c0 + c1 * std::sin(kTwoPi * theta))) < 1e-5);
    CHECK(std::abs(r.x_star - 1.0) < 1e-2);
  }
}

TEST_CASE("validation rejects fields without curvature") {
  CHECK_THROWS_AS(as_fibre_family(linear_field(-1.0, 0.3, 1.0, 1.0, golden_mean())),
                  ValidationFailed);
  try {
    as_fibre_family(linear_field(-1.0, 0.3, 1.0, 1.0, golden_mean()));
  } catch (const ValidationFailed& e) {
    CHECK_FALSE(e.violations().empty());
  }
}

TEST_CASE("blow-up is reported, and boundary trapping holds for the cap") {
  auto sys = quadratic_cap_field(0.5, 0.2, 2.0, 0.0);
  sys.steps = calibrate_steps(sys);
  CHECK_THROWS_AS(integrate(sys, 0.3, 0.0, -50.0, 2.0, sys.steps), Blowup);
  const auto fam = as_fibre_family(quadratic_cap_field(0.5, 0.2, 0.5, golden_mean()));
  CHECK(fam.eval(0.3, BasePoint(0.0), -1e4) == -std::numeric_limits<double>::infinity());
  const std::vector<double> thetas{0.0, 0.25, 0.5, 0.75};
  const auto cap = quadratic_cap_field(0.5, 0.2, 0.5, golden_mean());
  CHECK(check_boundary_trapping(cap, Orientation::ConcaveDecreasing, 0.3, thetas).empty());
  // Upper boundary at 1.2 sits inside the basin: the flow pushes it upwards, which fails.
  auto low = quadratic_cap_field(0.5, 0.2, 0.5, golden_mean(), {0.0, 1.2});
  CHECK_FALSE(check_boundary_trapping(low, Orientation::ConcaveDecreasing, 0.3, thetas).empty());
}
