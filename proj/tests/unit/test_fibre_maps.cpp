#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "skewsn/fibre_family.hpp"

using namespace skewsn;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ex1_ref(double beta, double theta, double x) {
  return std::atan(100.0 * x) - 2.0 * beta - 0.5 * (std::sin(kTwoPi * theta) + 1.0);
}

double ex2_ref(double beta, double t1, double t2, double x) {
  return std::atan(100.0 * x) - 2.0 * beta -
         0.5 * (std::sin(kTwoPi * t1) * std::sin(kTwoPi * t2) + 1.0);
}

// Purely linear model: zero curvature, so declaring it concave must be rejected.
class Flat final : public FibreModel {
 public:
  double eval(double beta, const BasePoint&, double x) const override { return 0.5 * x - beta; }
  double deriv_x(double, const BasePoint&, double) const override { return 0.5; }
  double deriv_xx(double, const BasePoint&, double) const override { return 0.0; }
  double deriv_beta(double, const BasePoint&, double) const override { return -1.0; }
  std::optional<double> inverse(double beta, const BasePoint&, double y) const override {
    return 2.0 * (y + beta);
  }
  std::string name() const override { return "flat"; }
};

}  // namespace

TEST_CASE("arctan_1d matches its formula") {
  const auto f = FibreFamily::arctan_1d(100.0, 0.5);
  for (double beta : {0.0, 0.2753743, 1.0}) {
    for (double th : {0.0, 0.25, 0.6}) {
      for (double x : {0.0, 0.01, 0.5, 2.0}) {
        CHECK(f.eval(beta, BasePoint(th), x) == doctest::Approx(ex1_ref(beta, th, x)).epsilon(1e-14));
      }
    }
  }
  CHECK(f.orientation() == Orientation::ConcaveDecreasing);
  CHECK(f.bounds().lo == 0.0);
  CHECK(f.bounds().hi == 2.0);
}

TEST_CASE("arctan_2d matches its formula") {
  const auto f = FibreFamily::arctan_2d(100.0, 0.5);
  CHECK(f.base_dimension() == 2);
  for (double x : {0.0, 0.1, 1.7}) {
    CHECK(f.eval(0.3, BasePoint(0.1, 0.8), x) ==
          doctest::Approx(ex2_ref(0.3, 0.1, 0.8, x)).epsilon(1e-14));
  }
}

TEST_CASE("analytic derivatives agree with central differences") {
  const auto f = FibreFamily::arctan_1d(100.0, 0.5);
  const BasePoint th(0.37);
  for (double x : {0.005, 0.05, 0.3, 1.5}) {
    const double h = 1e-6 * std::max(1e-2, x);
    const double dx = (f.eval(0.2, th, x + h) - f.eval(0.2, th, x - h)) / (2 * h);
    CHECK(f.deriv_x(0.2, th, x) == doctest::Approx(dx).epsilon(1e-6));
    const double dxx = (f.deriv_x(0.2, th, x + h) - f.deriv_x(0.2, th, x - h)) / (2 * h);
    CHECK(f.deriv_xx(0.2, th, x) == doctest::Approx(dxx).epsilon(1e-5));
    const double db = (f.eval(0.2 + 1e-6, th, x) - f.eval(0.2 - 1e-6, th, x)) / 2e-6;
    CHECK(f.deriv_beta(0.2, th, x) == doctest::Approx(db).epsilon(1e-8));
  }
}

TEST_CASE("inverse undoes the fibre map and rejects values outside its range") {
  const auto f = FibreFamily::arctan_1d(100.0, 0.5);
  const BasePoint th(0.81);
  for (double x : {0.0, 0.02, 0.7, 2.0}) {
    const auto back = f.inverse(0.25, th, f.eval(0.25, th, x));
    REQUIRE(back.has_value());
    CHECK(*back == doctest::Approx(x).epsilon(1e-12));
  }
  // arctan never exceeds pi/2, so a large target has no preimage.
  CHECK_FALSE(f.inverse(0.25, th, 5.0).has_value());
}

TEST_CASE("mirroring conjugates by x -> -x and flips the orientation") {
  const auto f = FibreFamily::arctan_1d(100.0, 0.5);
  const auto g = f.mirrored();
  CHECK(g.orientation() == Orientation::ConvexIncreasing);
  CHECK(g.bounds().lo == -2.0);
  CHECK(g.bounds().hi == 0.0);
  const BasePoint th(0.2);
  for (double x : {-1.5, -0.3, -0.01}) {
    CHECK(g.eval(0.1, th, x) == doctest::Approx(-f.eval(0.1, th, -x)));
    CHECK(g.deriv_xx(0.1, th, x) > 0.0);
    CHECK(g.deriv_beta(0.1, th, x) > 0.0);
  }
  CHECK(g.mirrored().orientation() == Orientation::ConcaveDecreasing);
}

TEST_CASE("custom models are checked against the declared orientation") {
  auto flat = std::make_shared<Flat>();
  CHECK_THROWS_AS(FibreFamily::custom(flat, Orientation::ConcaveDecreasing, {0.0, 2.0}),
                  std::invalid_argument);
  const auto ok = FibreFamily::custom(flat, Orientation::None, {0.0, 2.0});
  CHECK(ok.eval(0.5, BasePoint(0.0), 1.0) == doctest::Approx(0.0));
}

TEST_CASE("affine and table families are degenerate") {
  const auto a = FibreFamily::affine(0.5, 0.1, 0.2, 1.0, {-5.0, 5.0});
  CHECK(a.orientation() == Orientation::None);
  CHECK(a.eval(0.3, BasePoint(0.25), 2.0) == doctest::Approx(1.0 + 0.1 + 0.2 - 0.3));
  const auto t = FibreFamily::table({0.0, 1.0, 2.0}, {0.0, 0.8, 1.2}, 1.0, {0.0, 2.0});
  CHECK(t.eval(0.0, BasePoint(0.5), 0.5) == doctest::Approx(0.4));
  CHECK(t.eval(0.1, BasePoint(0.5), 1.5) == doctest::Approx(0.9));
  const auto inv = t.inverse(0.0, BasePoint(0.5), 1.0);
  REQUIRE(inv.has_value());
  CHECK(*inv == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("boundary curves are trapping for the worked example") {
  const auto f = FibreFamily::arctan_1d(100.0, 0.5);
  const auto rot = BaseSystem::golden_rotation();
  std::vector<BasePoint> s;
  for (int i = 0; i < 64; ++i) s.emplace_back(i / 64.0);
  for (double beta : {0.0, 0.27, 1.0}) {
    const auto check = check_boundaries(f, rot, beta, s);
    CHECK(check.upper_ok);
    CHECK(check.lower_ok);
  }
}
