#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "skewsn/base_system.hpp"

using namespace skewsn;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent reference: rotation orbit computed in long double.
double rotation_ref(double theta, double rho, long k) {
  long double v = static_cast<long double>(theta) + static_cast<long double>(k) * rho;
  v -= std::floor(v);
  return static_cast<double>(v);
}

double circ(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

// Torus map written out from its definition.
std::pair<double, double> torus_ref(double t1, double t2) {
  const double s = 0.5 * std::sin(kTwoPi * t1);
  const double n2 = t2 + s;
  const double n1 = t1 + 0.5 * std::sin(kTwoPi * n2);
  return {n1 - std::floor(n1), n2 - std::floor(n2)};
}

}  // namespace

TEST_CASE("golden mean solves rho^2 + rho = 1") {
  const double r = golden_mean();
  CHECK(r == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-16));
  CHECK(std::abs(r * r + r - 1.0) < 1e-15);
}

TEST_CASE("wrap_unit reduces into [0, 1)") {
  CHECK(wrap_unit(0.25) == 0.25);
  CHECK(wrap_unit(-0.25) == 0.75);
  CHECK(wrap_unit(1.0) == 0.0);
  CHECK(wrap_unit(3.5) == 0.5);
  const double just_below = wrap_unit(-1e-18);
  CHECK(just_below >= 0.0);
  CHECK(just_below < 1.0);
}

TEST_CASE("rotation orbits agree with extended-precision reference") {
  const BaseSystem rot = BaseSystem::golden_rotation();
  const double rho = golden_mean();
  const BasePoint start(0.123);
  const auto fwd = rot.orbit(start, 1000, Direction::Forward);
  const auto bwd = rot.orbit(start, 1000, Direction::Backward);
  REQUIRE(fwd.size() == 1001);
  for (long k : {0L, 1L, 17L, 500L, 1000L}) {
    CHECK(circ(fwd[k][0], rotation_ref(0.123, rho, k)) < 1e-12);
    CHECK(circ(bwd[k][0], rotation_ref(0.123, rho, -k)) < 1e-12);
  }
}

TEST_CASE("rotation backward inverts forward") {
  const BaseSystem rot = BaseSystem::rotation(0.3);
  for (double t : {0.0, 0.1, 0.7, 0.999}) {
    const BasePoint p(t);
    CHECK(circ(rot.backward(rot.forward(p))[0], p[0]) < 1e-15);
  }
}

TEST_CASE("torus map matches its definition and is invertible") {
  const BaseSystem torus = BaseSystem::torus_map();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const BasePoint p(a, b);
    const auto [r1, r2] = torus_ref(a, b);
    const BasePoint q = torus.forward(p);
    CHECK(circ(q[0], r1) < 1e-12);
    CHECK(circ(q[1], r2) < 1e-12);
    const BasePoint back = torus.backward(q);
    CHECK(torus_distance(back, p) < 1e-12);
  }
}

TEST_CASE("M1 and M2 are period-two orbits of the torus map") {
  const BaseSystem torus = BaseSystem::torus_map();
  for (const auto& orbit : {torus_orbit_m1(), torus_orbit_m2()}) {
    REQUIRE(orbit.size() == 2);
    for (const auto& p : orbit) {
      CHECK(torus_distance(torus.forward(p), p) > 0.1);
      CHECK(torus_distance(torus.forward(torus.forward(p)), p) < 1e-12);
    }
    CHECK(is_invariant_set(torus, orbit));
  }
  const auto m1 = torus_orbit_m1();
  CHECK(torus_distance(m1[0], BasePoint(0.25, 0.25)) < 1e-15);
  CHECK(torus_distance(m1[1], BasePoint(0.75, 0.75)) < 1e-15);
  const std::vector<BasePoint> half{BasePoint(0.25, 0.25)};
  CHECK_FALSE(is_invariant_set(torus, half));
}

TEST_CASE("periodic orbit base cycles through its points") {
  const BaseSystem per = BaseSystem::periodic_orbit({BasePoint(0.1), BasePoint(0.4), BasePoint(0.8)});
  CHECK(per.forward(BasePoint(0.1)) == BasePoint(0.4));
  CHECK(per.forward(BasePoint(0.8)) == BasePoint(0.1));
  CHECK(per.backward(BasePoint(0.1)) == BasePoint(0.8));
  CHECK_THROWS_AS(per.forward(BasePoint(0.5)), std::invalid_argument);
  CHECK(per.points().size() == 3);
}

TEST_CASE("identity base is the identity") {
  const BaseSystem id = BaseSystem::identity(2);
  const BasePoint p(0.3, 0.9);
  CHECK(id.forward(p) == p);
  CHECK(id.backward(p) == p);
  CHECK(id.dimension() == 2);
}

TEST_CASE("orbit_into reuses the caller buffer") {
  const BaseSystem rot = BaseSystem::rotation(0.25);
  std::vector<BasePoint> buf;
  rot.orbit_into(BasePoint(0.0), 4, Direction::Forward, buf);
  REQUIRE(buf.size() == 5);
  CHECK(buf[4][0] == doctest::Approx(0.0));
  CHECK(buf[1][0] == doctest::Approx(0.25));
}
