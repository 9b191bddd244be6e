#pragma once

// Ground-truth computations that do not depend on the graph engine.

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skewsn/base_system.hpp"
#include "skewsn/fibre_family.hpp"

namespace skewsn::oracle {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoBracket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A one-parameter family of increasing, strictly concave interval maps, decreasing in beta.
struct ScalarFamily {
  std::function<double(double beta, double x)> g;
  std::function<double(double beta, double x)> g_x;
  std::function<double(double beta, double x)> g_xx;
  std::function<double(double beta, double x)> g_beta;
  Interval x_range{0.0, 2.0};
  Interval beta_range{0.0, 1.0};
  std::string name;
};

/// g(x) = arctan(alpha x) - 2 beta - offset.
ScalarFamily arctan_family(double alpha, double offset, Interval x_range = {0.0, 2.0});

/// g(x) = -(x - 1)^2 + c - beta; tangency at x = 1/2 with beta* = c - 3/4.
ScalarFamily quadratic_cap_family(double c, Interval x_range = {0.0, 1.0});

/// The fibre map over a fixed base point, viewed as a scalar family.
ScalarFamily frozen_fibre(const FibreFamily& family, const BasePoint& theta);

/// beta* = arctan(sqrt(alpha - 1)) / 2 - sqrt(alpha - 1) / (2 alpha) - offset / 2.
/// Throws DomainError unless alpha > 1.
double closed_form_betac_arctan(double alpha, double offset);

/// x* = sqrt(alpha - 1) / alpha, where the arctan slope equals one.
double arctan_tangency_point(double alpha);

struct SaddleNode1D {
  double beta_star = 0.0;
  double x_star = 0.0;
  double residual_fixed = 0.0;  // |g(x*) - x*|
  double residual_slope = 0.0;  // |g'(x*) - 1|
};

/// Solves g(x) = x, g'(x) = 1. The slope condition is bracketed over x_range (g' is strictly
/// decreasing), the fixed-point condition over beta_range (max_x g - x is decreasing in beta);
/// both are polished by safeguarded Newton steps. Throws NoBracket when either sign change is
/// missing.
SaddleNode1D solve_saddle_node_1d(const ScalarFamily& family);

struct IdentityBaseBifurcation {
  double beta_c = 0.0;    // min over samples of beta*(theta)
  double beta_hat = 0.0;  // max over samples of beta*(theta)
  BasePoint argmin;
  BasePoint argmax;
  std::vector<double> per_sample;
};

/// Per-fibre saddle-node parameters when the base map is the identity.
IdentityBaseBifurcation identity_base_betac(const FibreFamily& family,
                                            std::span<const BasePoint> samples);

}  // namespace skewsn::oracle
