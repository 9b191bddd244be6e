#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "skewsn/graph_engine.hpp"

using namespace skewsn;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAlpha = 100.0;
constexpr double kGamma = 0.5;

double frac(long double v) { return static_cast<double>(v - std::floor(v)); }

double f_ref(double beta, double theta, double x) {
  return std::atan(kAlpha * x) - 2.0 * beta - kGamma * (std::sin(kTwoPi * theta) + 1.0);
}

double f_inv_ref(double beta, double theta, double y) {
  return std::tan(y + 2.0 * beta + kGamma * (std::sin(kTwoPi * theta) + 1.0)) / kAlpha;
}

// Naive upper pullback: start at 2 over theta - n rho and push forward n times.
double upper_ref(double beta, double theta, long n) {
  const long double rho = golden_mean();
  double x = 2.0;
  for (long k = n; k >= 1; --k) x = f_ref(beta, frac(theta - k * rho), x);
  return x;
}

// Naive lower pullback: start at 0 over theta + n rho and pull back with inverses.
double lower_ref(double beta, double theta, long n) {
  const long double rho = golden_mean();
  double x = 0.0;
  for (long j = n - 1; j >= 0; --j) x = f_inv_ref(beta, frac(theta + j * rho), x);
  return x;
}

// Invariant graph of x -> s x + c0 + c1 sin(2 pi theta) - b beta over rotation by rho:
// phi(theta) = A + Im(C e^{2 pi i theta}), A = (c0 - b beta) / (1 - s), C = c1 / (e^{2 pi i rho} - s).
double affine_graph(double s, double c0, double c1, double b, double beta, double rho, double theta) {
  const std::complex<double> c = c1 / (std::polar(1.0, kTwoPi * rho) - s);
  return (c0 - b * beta) / (1.0 - s) + (c * std::polar(1.0, kTwoPi * theta)).imag();
}

std::vector<BasePoint> grid(int n) {
  std::vector<BasePoint> s;
  for (int i = 0; i < n; ++i) s.emplace_back(static_cast<double>(i) / n);
  return s;
}

}  // namespace

TEST_CASE("orientation decides which side pulls forward") {
  CHECK(pulls_forward(Orientation::ConcaveDecreasing, GraphSide::Upper));
  CHECK_FALSE(pulls_forward(Orientation::ConcaveDecreasing, GraphSide::Lower));
  CHECK(pulls_forward(Orientation::ConvexIncreasing, GraphSide::Lower));
  CHECK_FALSE(pulls_forward(Orientation::ConvexIncreasing, GraphSide::Upper));
  CHECK(pulls_forward(Orientation::None, GraphSide::Lower));
  CHECK(pulls_forward(Orientation::None, GraphSide::Upper));
  CHECK(attracting_side(Orientation::ConcaveDecreasing) == GraphSide::Upper);
}

TEST_CASE("pullbacks agree with naive reference loops") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  for (double theta : {0.0, 0.3, 0.77}) {
    const auto up = pullback_graph_point(rot, fam, 0.25, BasePoint(theta), 500, GraphSide::Upper);
    const auto lo = pullback_graph_point(rot, fam, 0.25, BasePoint(theta), 500, GraphSide::Lower);
    REQUIRE(up.has_value());
    REQUIRE(lo.has_value());
    CHECK(*up == doctest::Approx(upper_ref(0.25, theta, 500)).epsilon(1e-10));
    CHECK(*lo == doctest::Approx(lower_ref(0.25, theta, 500)).epsilon(1e-10));
    CHECK(*up > *lo);
  }
}

TEST_CASE("affine family converges to its closed-form invariant graph from both sides") {
  const double s = 0.5, c0 = 0.2, c1 = 0.3, b = 1.0, beta = 0.1;
  const double rho = golden_mean();
  const auto rot = BaseSystem::rotation(rho);
  const auto fam = FibreFamily::affine(s, c0, c1, b, {-5.0, 5.0});
  const auto samples = grid(50);
  const auto up = compute_graph_field(rot, fam, beta, samples, 200, GraphSide::Upper);
  const auto lo = compute_graph_field(rot, fam, beta, samples, 200, GraphSide::Lower);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ref = affine_graph(s, c0, c1, b, beta, rho, samples[i][0]);
    CHECK(*up.values[i] == doctest::Approx(ref).epsilon(1e-12));
    CHECK(*lo.values[i] == doctest::Approx(ref).epsilon(1e-12));
  }
  const auto report = pinching_report(lo, up);
  CHECK(report.classification == PinchClass::Collapsed);
  // Affine fibres have constant slope s, so every exponent is log s.
  LyapunovOptions o;
  o.steps = 1000;
  o.depth = 100;
  CHECK(lyapunov(rot, fam, beta, BasePoint(0.1), GraphSide::Upper, o) ==
        doctest::Approx(std::log(s)).epsilon(1e-12));
}

TEST_CASE("graphs are invariant and ordered below the bifurcation") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const auto samples = grid(200);
  const auto up = compute_graph_field(rot, fam, 0.25, samples, 2000, GraphSide::Upper);
  const auto lo = compute_graph_field(rot, fam, 0.25, samples, 2000, GraphSide::Lower);
  CHECK_FALSE(up.any_escaped());
  CHECK_FALSE(lo.any_escaped());
  CHECK(invariance_residual(rot, fam, up) < 1e-9);
  CHECK(invariance_residual(rot, fam, lo) < 1e-9);
  const auto report = pinching_report(lo, up);
  CHECK(report.classification == PinchClass::UniformlySeparated);
  CHECK(report.min_gap > 1e-3);
  CHECK(report.delta == report.min_gap);
}

TEST_CASE("everything escapes well above the bifurcation") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const auto samples = grid(100);
  const auto up = compute_graph_field(rot, fam, 1.0, samples, 1000, GraphSide::Upper);
  CHECK(up.all_escaped());
  const auto lo = compute_graph_field(rot, fam, 1.0, samples, 1000, GraphSide::Lower);
  CHECK_THROWS_AS(pinching_report(lo, up), std::domain_error);
}

TEST_CASE("results do not depend on the thread count") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const auto samples = grid(257);
  const auto a = compute_graph_field(rot, fam, 0.27, samples, 1000, GraphSide::Upper, {0.5, 1});
  const auto b = compute_graph_field(rot, fam, 0.27, samples, 1000, GraphSide::Upper, {0.5, 4});
  CHECK(a.values == b.values);
}

TEST_CASE("adaptive schedule converges and matches a deep fixed pullback") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const auto samples = grid(64);
  const auto ad = compute_graph_field_adaptive(rot, fam, 0.26, samples, GraphSide::Upper, {});
  CHECK(ad.count(SampleStatus::Converged) == samples.size());
  const auto deep = compute_graph_field(rot, fam, 0.26, samples, 5000, GraphSide::Upper);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(*ad.field.values[i] == doctest::Approx(*deep.values[i]).epsilon(1e-9));
  }
  const auto esc = compute_graph_field_adaptive(rot, fam, 0.5, samples, GraphSide::Upper, {}, {}, true);
  CHECK(esc.count(SampleStatus::Escaped) > 0);
  CHECK(esc.count(SampleStatus::Converged) == 0);
}

TEST_CASE("Lyapunov exponent equals the chain-rule finite-difference average") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const double beta = 0.25;
  const std::size_t n = 5000, depth = 1000;
  LyapunovOptions o;
  o.steps = n;
  o.depth = depth;
  const double engine = lyapunov(rot, fam, beta, BasePoint(0.0), GraphSide::Upper, o);
  // Reference: continue the naive pullback and difference each step's fibre map.
  const long double rho = golden_mean();
  double x = upper_ref(beta, 0.0, depth);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double th = frac(k * rho);
    const double h = 1e-7 * std::max(1e-3, std::abs(x));
    sum += std::log((f_ref(beta, th, x + h) - f_ref(beta, th, x - h)) / (2 * h));
    x = f_ref(beta, th, x);
  }
  CHECK(engine == doctest::Approx(sum / n).epsilon(1e-6));
  CHECK(engine < 0.0);
  CHECK(lyapunov(rot, fam, beta, BasePoint(0.0), GraphSide::Lower, o) > 0.0);
  CHECK_THROWS_AS(lyapunov(rot, fam, 0.6, BasePoint(0.0), GraphSide::Upper, o), GraphEscaped);
}

TEST_CASE("pinching report on hand-made fields") {
  GraphField lo, up;
  for (int i = 0; i < 4; ++i) {
    lo.samples.emplace_back(i / 4.0);
    up.samples.emplace_back(i / 4.0);
  }
  lo.values = {0.0, 0.0, 0.0, 0.0};
  up.values = {1.0, 0.5, 1e-4, 2.0};
  auto r = pinching_report(lo, up);
  CHECK(r.min_gap == doctest::Approx(1e-4));
  CHECK(r.argmin == BasePoint(0.5));
  CHECK(r.classification == PinchClass::WeaklyPinched);
  CHECK(r.n_compared == 4);
  up.values[2] = 1e-12;
  CHECK(pinching_report(lo, up).classification == PinchClass::Collapsed);
  up.values[2] = 0.3;
  CHECK(pinching_report(lo, up).classification == PinchClass::UniformlySeparated);
  up.values[1].reset();
  CHECK_THROWS_AS(pinching_report(lo, up), MismatchedFields);
  up.samples[0] = BasePoint(0.9);
  lo.values[1].reset();
  CHECK_THROWS_AS(pinching_report(lo, up), MismatchedFields);
}

TEST_CASE("interval fields drop crossed bounds") {
  GraphField lo, up;
  lo.samples = {BasePoint(0.0), BasePoint(0.5)};
  up.samples = lo.samples;
  lo.values = {0.1, 0.9};
  up.values = {0.7, 0.2};
  const auto iv = make_interval_field(lo, up);
  REQUIRE(iv.intervals[0].has_value());
  CHECK(iv.intervals[0]->lo == 0.1);
  CHECK_FALSE(iv.intervals[1].has_value());
  CHECK(iv.fraction_bounded() == doctest::Approx(0.5));
}

TEST_CASE("contraction is detected for the attracting graph") {
  const auto rot = BaseSystem::golden_rotation();
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const auto samples = grid(100);
  const auto up = compute_graph_field(rot, fam, 0.25, samples, 1000, GraphSide::Upper);
  const auto c = contraction_check(rot, fam, 0.25, up, 50);
  REQUIRE(c.has_value());
  CHECK(c->alpha_bound < 1.0);
  const auto lo = compute_graph_field(rot, fam, 0.25, samples, 1000, GraphSide::Lower);
  const auto cl = contraction_check(rot, fam, 0.25, lo, 50);
  REQUIRE(cl.has_value());
  CHECK(cl->alpha_bound < 1.0);
}

TEST_CASE("forward iteration follows the skew product") {
  const auto rot = BaseSystem::rotation(0.25);
  const auto fam = FibreFamily::arctan_1d(kAlpha, kGamma);
  const auto p = iterate_forward(rot, fam, 0.1, {BasePoint(0.0), 1.0}, 2);
  const double x1 = f_ref(0.1, 0.0, 1.0);
  CHECK(p.x == doctest::Approx(f_ref(0.1, 0.25, x1)));
  CHECK(p.theta[0] == doctest::Approx(0.5));
}
