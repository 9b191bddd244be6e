#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace skewsn {

/// (sqrt(5) - 1) / 2 at full double precision.
double golden_mean();

/// Reduces x to [0, 1). Exact 1.0 (after rounding) maps to 0.0.
double wrap_unit(double x);

/// A point of the base torus T^1 or T^2. Coordinates live in [0, 1).
struct BasePoint {
  std::array<double, 2> coords{0.0, 0.0};
  int dim = 1;

  BasePoint() = default;
  explicit BasePoint(double t1) : coords{wrap_unit(t1), 0.0}, dim(1) {}
  BasePoint(double t1, double t2) : coords{wrap_unit(t1), wrap_unit(t2)}, dim(2) {}

  double operator[](std::size_t i) const { return coords[i]; }

  friend bool operator==(const BasePoint&, const BasePoint&) = default;
};

/// Largest per-coordinate distance on the torus.
double torus_distance(const BasePoint& a, const BasePoint& b);

std::string to_string(const BasePoint& p);

enum class Direction { Forward, Backward };

/// Invertible base transformation. Closed set of kinds; values are immutable.
class BaseSystem {
 public:
  enum class Kind { Identity, Rotation, TorusMap, PeriodicOrbit };

  static BaseSystem identity(int dim = 1);
  static BaseSystem rotation(double rho);
  static BaseSystem golden_rotation() { return rotation(golden_mean()); }
  /// omega(t1, t2) = (t1 + sin(2 pi (t2 + sin(2 pi t1) / 2)) / 2, t2 + sin(2 pi t1) / 2) mod 1.
  static BaseSystem torus_map();
  /// Cycles the given points in order; the last maps back to the first.
  static BaseSystem periodic_orbit(std::vector<BasePoint> points);

  Kind kind() const { return kind_; }
  int dimension() const { return dim_; }
  double rho() const { return rho_; }
  const std::vector<BasePoint>& points() const { return points_; }

  /// Throws std::invalid_argument when p does not belong to this base.
  void validate(const BasePoint& p) const;

  BasePoint forward(const BasePoint& p) const;
  BasePoint backward(const BasePoint& p) const;

  /// n + 1 points; element k is omega^{+-k}(p).
  std::vector<BasePoint> orbit(const BasePoint& p, std::size_t n, Direction dir) const;

  /// Same as orbit() but writes into a caller-owned buffer (resized to n + 1).
  void orbit_into(const BasePoint& p, std::size_t n, Direction dir,
                  std::vector<BasePoint>& out) const;

  std::string describe() const;

 private:
  BaseSystem(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  std::size_t index_of(const BasePoint& p) const;

  Kind kind_;
  int dim_;
  double rho_ = 0.0;
  std::vector<BasePoint> points_;
};

/// The two period-2 orbits of the torus map around which its elliptic islands sit.
std::vector<BasePoint> torus_orbit_m1();
std::vector<BasePoint> torus_orbit_m2();

/// True when every point of `set` is mapped within `tol` onto a point of `set`.
bool is_invariant_set(const BaseSystem& system, std::span<const BasePoint> set, double tol = 1e-9);

}  // namespace skewsn
