#include "skewsn/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace skewsn::oracle {

namespace {

// Root of a decreasing function on [a, b], bisected down to adjacent doubles and then
// refined with Newton steps that must stay inside the final bracket.
template <class F, class DF>
double decreasing_root(F&& f, DF&& df, double a, double b) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (f(mid) > 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  double x = 0.5 * (a + b);
  for (int it = 0; it < 3; ++it) {
    const double slope = df(x);
    if (slope == 0.0 || !std::isfinite(slope)) break;
    const double next = x - f(x) / slope;
    if (!(next >= a && next <= b) || std::abs(f(next)) >= std::abs(f(x))) break;
    x = next;
  }
  return x;
}

}  // namespace

ScalarFamily arctan_family(double alpha, double offset, Interval x_range) {
  ScalarFamily fam;
  fam.g = [=](double beta, double x) { return std::atan(alpha * x) - 2.0 * beta - offset; };
  fam.g_x = [=](double, double x) { return alpha / (1.0 + alpha * alpha * x * x); };
  fam.g_xx = [=](double, double x) {
    const double d = 1.0 + alpha * alpha * x * x;
    return -2.0 * alpha * alpha * alpha * x / (d * d);
  };
  fam.g_beta = [](double, double) { return -2.0; };
  fam.x_range = x_range;
  // Wide enough for every offset in [0, 2] and alpha > 1.
  fam.beta_range = Interval{-4.0, 4.0};
  std::ostringstream os;
  os << "arctan(alpha=" << alpha << ", offset=" << offset << ")";
  fam.name = os.str();
  return fam;
}

ScalarFamily quadratic_cap_family(double c, Interval x_range) {
  ScalarFamily fam;
  fam.g = [=](double beta, double x) { return -(x - 1.0) * (x - 1.0) + c - beta; };
  fam.g_x = [](double, double x) { return -2.0 * (x - 1.0); };
  fam.g_xx = [](double, double) { return -2.0; };
  fam.g_beta = [](double, double) { return -1.0; };
  fam.x_range = x_range;
  fam.name = "quadratic_cap";
  return fam;
}

ScalarFamily frozen_fibre(const FibreFamily& family, const BasePoint& theta) {
  ScalarFamily fam;
  fam.g = [family, theta](double beta, double x) { return family.eval(beta, theta, x); };
  fam.g_x = [family, theta](double beta, double x) { return family.deriv_x(beta, theta, x); };
  fam.g_xx = [family, theta](double beta, double x) { return family.deriv_xx(beta, theta, x); };
  fam.g_beta = [family, theta](double beta, double x) {
    return family.deriv_beta(beta, theta, x);
  };
  fam.x_range = family.bounds();
  fam.name = family.describe() + " at " + to_string(theta);
  return fam;
}

double closed_form_betac_arctan(double alpha, double offset) {
  if (!(alpha > 1.0)) throw DomainError("closed form needs alpha > 1");
  const double s = std::sqrt(alpha - 1.0);
  return 0.5 * std::atan(s) - s / (2.0 * alpha) - 0.5 * offset;
}

double arctan_tangency_point(double alpha) {
  if (!(alpha > 1.0)) throw DomainError("tangency point needs alpha > 1");
  return std::sqrt(alpha - 1.0) / alpha;
}

SaddleNode1D solve_saddle_node_1d(const ScalarFamily& fam) {
  const Interval xr = fam.x_range;
  const Interval br = fam.beta_range;

  auto slope_point = [&](double beta) {
    auto s = [&](double x) { return fam.g_x(beta, x) - 1.0; };
    if (!(s(xr.lo) > 0.0 && s(xr.hi) < 0.0)) {
      throw NoBracket(fam.name + ": slope one is not bracketed by the x range");
    }
    return decreasing_root(s, [&](double x) { return fam.g_xx(beta, x); }, xr.lo, xr.hi);
  };
  // Height of the concave cap above the diagonal; decreasing in beta.
  auto height = [&](double beta) {
    const double x = slope_point(beta);
    return fam.g(beta, x) - x;
  };
  if (!(height(br.lo) > 0.0)) {
    throw NoBracket(fam.name + ": no fixed points at the lower end of the beta range");
  }
  if (!(height(br.hi) < 0.0)) {
    throw NoBracket(fam.name + ": fixed points persist at the upper end of the beta range");
  }
  // d/dbeta of the cap height is g_beta at the tangency (envelope argument).
  const double beta_star = decreasing_root(
      height, [&](double beta) { return fam.g_beta(beta, slope_point(beta)); }, br.lo, br.hi);

  SaddleNode1D out;
  out.beta_star = beta_star;
  out.x_star = slope_point(beta_star);
  out.residual_fixed = std::abs(fam.g(beta_star, out.x_star) - out.x_star);
  out.residual_slope = std::abs(fam.g_x(beta_star, out.x_star) - 1.0);
  return out;
}

IdentityBaseBifurcation identity_base_betac(const FibreFamily& family,
                                            std::span<const BasePoint> samples) {
  if (samples.empty()) throw std::invalid_argument("identity base oracle: no samples");
  if (family.orientation() != Orientation::ConcaveDecreasing) {
    throw std::invalid_argument("identity base oracle: needs a concave family decreasing in beta");
  }
  IdentityBaseBifurcation out;
  out.beta_c = std::numeric_limits<double>::infinity();
  out.beta_hat = -std::numeric_limits<double>::infinity();
  out.per_sample.reserve(samples.size());
  for (const auto& theta : samples) {
    const double b = solve_saddle_node_1d(frozen_fibre(family, theta)).beta_star;
    out.per_sample.push_back(b);
    if (b < out.beta_c) {
      out.beta_c = b;
      out.argmin = theta;
    }
    if (b > out.beta_hat) {
      out.beta_hat = b;
      out.argmax = theta;
    }
  }
  return out;
}

}  // namespace skewsn::oracle
