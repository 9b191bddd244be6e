#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "skewsn/base_system.hpp"

namespace skewsn {

/// Shape of the fibre maps in x and their response to beta.
enum class Orientation {
  ConcaveDecreasing,  // f'' < 0, d/dbeta f < 0: upper bounding graph attracts
  ConvexIncreasing,   // f'' > 0, d/dbeta f > 0: lower bounding graph attracts
  None,               // degenerate test families; no convexity claims
};

std::string to_string(Orientation o);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Extension point for fibre maps that have no closed form (for example maps induced by a flow).
class FibreModel {
 public:
  virtual ~FibreModel() = default;

  virtual double eval(double beta, const BasePoint& theta, double x) const = 0;
  virtual double deriv_x(double beta, const BasePoint& theta, double x) const = 0;
  virtual double deriv_xx(double beta, const BasePoint& theta, double x) const = 0;
  virtual double deriv_beta(double beta, const BasePoint& theta, double x) const = 0;

  /// Preimage of y, or nullopt when y lies outside the range of the fibre map.
  virtual std::optional<double> inverse(double beta, const BasePoint& theta, double y) const = 0;

  virtual std::string name() const = 0;
};

/// Beta-parametrised monotone fibre maps f_{beta,theta} on Gamma = [gamma_lo, gamma_hi].
class FibreFamily {
 public:
  /// arctan(alpha x) - 2 beta - gamma (sin(2 pi theta) + 1)
  static FibreFamily arctan_1d(double alpha, double gamma, Interval bounds = {0.0, 2.0});
  /// arctan(alpha x) - 2 beta - gamma (sin(2 pi theta1) sin(2 pi theta2) + 1)
  static FibreFamily arctan_2d(double alpha, double gamma, Interval bounds = {0.0, 2.0});
  /// slope x + c0 + c1 sin(2 pi theta1) - beta_coeff beta
  static FibreFamily affine(double slope, double c0, double c1, double beta_coeff, Interval bounds);
  /// theta-independent piecewise-linear map through (xs[i], ys[i]) minus beta_coeff beta,
  /// extended linearly beyond the end knots.
  static FibreFamily table(std::vector<double> xs, std::vector<double> ys, double beta_coeff,
                           Interval bounds);
  /// Wraps an externally defined model. The declared orientation is validated by sampling.
  static FibreFamily custom(std::shared_ptr<const FibreModel> model, Orientation orientation,
                            Interval bounds, int base_dim = 0);

  /// Conjugate by x -> -x: f~(x) = -f(-x) on [-hi, -lo]. Swaps concave/convex orientation.
  FibreFamily mirrored() const;

  double eval(double beta, const BasePoint& theta, double x) const;
  double deriv_x(double beta, const BasePoint& theta, double x) const;
  double deriv_xx(double beta, const BasePoint& theta, double x) const;
  double deriv_beta(double beta, const BasePoint& theta, double x) const;
  std::optional<double> inverse(double beta, const BasePoint& theta, double y) const;

  double gamma_lower(const BasePoint&) const { return bounds_.lo; }
  double gamma_upper(const BasePoint&) const { return bounds_.hi; }
  const Interval& bounds() const { return bounds_; }
  Orientation orientation() const { return orientation_; }
  /// Required base dimension, 0 if any.
  int base_dimension() const { return base_dim_; }
  bool is_mirrored() const { return mirrored_; }
  std::string describe() const;

  /// Checks the declared orientation against sampled second and beta derivatives.
  /// Throws std::invalid_argument on mismatch. Called by the factories.
  void validate_orientation(std::size_t n_points = 1000) const;

 private:
  struct Arctan1D {
    double alpha, gamma;
  };
  struct Arctan2D {
    double alpha, gamma;
  };
  struct Affine {
    double slope, c0, c1, beta_coeff;
  };
  struct Table {
    std::vector<double> xs, ys;
    double beta_coeff;
  };
  struct Custom {
    std::shared_ptr<const FibreModel> model;
  };
  using Model = std::variant<Arctan1D, Arctan2D, Affine, Table, Custom>;

  FibreFamily(Model model, Orientation orientation, Interval bounds, int base_dim);

  double raw_eval(double beta, const BasePoint& theta, double x) const;
  double raw_deriv_x(double beta, const BasePoint& theta, double x) const;
  double raw_deriv_xx(double beta, const BasePoint& theta, double x) const;
  double raw_deriv_beta(double beta, const BasePoint& theta, double x) const;
  std::optional<double> raw_inverse(double beta, const BasePoint& theta, double y) const;
  std::optional<double> bisect_inverse(double beta, const BasePoint& theta, double y) const;

  std::shared_ptr<const Model> model_;
  Orientation orientation_;
  Interval bounds_;  // in mirrored coordinates when mirrored_
  int base_dim_;
  bool mirrored_ = false;
};

/// Sign checks of the boundary curves gamma-/gamma+ over sampled base points.
struct BoundaryCheck {
  bool upper_ok = true;  // orientation-appropriate inequality at gamma+
  bool lower_ok = true;  // orientation-appropriate inequality at gamma-
  /// For concave families: f(gamma+) <= gamma+(omega) and f(gamma-) <= gamma-(omega),
  /// i.e. the forward transform pushes gamma+ down and the backward transform pushes gamma- up.
  /// Convex families use the mirrored inequalities.
  std::string description;
};

BoundaryCheck check_boundaries(const FibreFamily& family, const BaseSystem& system, double beta,
                               std::span<const BasePoint> samples);

}  // namespace skewsn
