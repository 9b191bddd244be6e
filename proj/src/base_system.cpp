#include "skewsn/base_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace skewsn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMatchTol = 1e-12;

BasePoint torus_forward(const BasePoint& p) {
  const double t2 = p[1] + 0.5 * std::sin(kTwoPi * p[0]);
  const double t1 = p[0] + 0.5 * std::sin(kTwoPi * t2);
  return BasePoint(t1, t2);
}

// Undo the two shears in reverse order: first component first, then second.
BasePoint torus_backward(const BasePoint& p) {
  const double t1 = wrap_unit(p[0] - 0.5 * std::sin(kTwoPi * p[1]));
  const double t2 = p[1] - 0.5 * std::sin(kTwoPi * t1);
  return BasePoint(t1, t2);
}

}  // namespace

double golden_mean() {
  static const double value = (std::sqrt(5.0) - 1.0) / 2.0;
  return value;
}

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;
  return r;
}

double torus_distance(const BasePoint& a, const BasePoint& b) {
  double d = 0.0;
  for (int i = 0; i < std::max(a.dim, b.dim); ++i) {
    const double diff = std::abs(a.coords[i] - b.coords[i]);
    d = std::max(d, std::min(diff, 1.0 - diff));
  }
  return d;
}

std::string to_string(const BasePoint& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p[0];
  if (p.dim == 2) os << ", " << p[1];
  os << ")";
  return os.str();
}

BaseSystem BaseSystem::identity(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("identity base: dimension must be 1 or 2");
  return BaseSystem(Kind::Identity, dim);
}

BaseSystem BaseSystem::rotation(double rho) {
  if (!std::isfinite(rho)) throw std::invalid_argument("rotation base: rho must be finite");
  BaseSystem s(Kind::Rotation, 1);
  s.rho_ = rho;
  return s;
}

BaseSystem BaseSystem::torus_map() { return BaseSystem(Kind::TorusMap, 2); }

BaseSystem BaseSystem::periodic_orbit(std::vector<BasePoint> points) {
  if (points.empty()) throw std::invalid_argument("periodic orbit base: no points");
  const int dim = points.front().dim;
  for (const auto& p : points) {
    if (p.dim != dim) throw std::invalid_argument("periodic orbit base: mixed dimensions");
  }
  BaseSystem s(Kind::PeriodicOrbit, dim);
  s.points_ = std::move(points);
  return s;
}

void BaseSystem::validate(const BasePoint& p) const {
  if (p.dim != dim_) {
    throw std::invalid_argument("base point " + to_string(p) + " has dimension " +
                                std::to_string(p.dim) + ", base expects " + std::to_string(dim_));
  }
  for (int i = 0; i < p.dim; ++i) {
    if (!(p.coords[i] >= 0.0 && p.coords[i] < 1.0)) {
      throw std::invalid_argument("base point coordinate outside [0, 1): " + to_string(p));
    }
  }
  if (kind_ == Kind::PeriodicOrbit) (void)index_of(p);
}

std::size_t BaseSystem::index_of(const BasePoint& p) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (torus_distance(points_[i], p) <= kMatchTol) return i;
  }
  throw std::invalid_argument("point " + to_string(p) + " is not on the periodic orbit");
}

BasePoint BaseSystem::forward(const BasePoint& p) const {
  switch (kind_) {
    case Kind::Identity:
      return p;
    case Kind::Rotation:
      return BasePoint(p[0] + rho_);
    case Kind::TorusMap:
      return torus_forward(p);
    case Kind::PeriodicOrbit:
      return points_[(index_of(p) + 1) % points_.size()];
  }
  return p;
}

BasePoint BaseSystem::backward(const BasePoint& p) const {
  switch (kind_) {
    case Kind::Identity:
      return p;
    case Kind::Rotation:
      return BasePoint(p[0] - rho_);
    case Kind::TorusMap:
      return torus_backward(p);
    case Kind::PeriodicOrbit: {
      const std::size_t n = points_.size();
      return points_[(index_of(p) + n - 1) % n];
    }
  }
  return p;
}

std::vector<BasePoint> BaseSystem::orbit(const BasePoint& p, std::size_t n, Direction dir) const {
  std::vector<BasePoint> out;
  orbit_into(p, n, dir, out);
  return out;
}

void BaseSystem::orbit_into(const BasePoint& p, std::size_t n, Direction dir,
                            std::vector<BasePoint>& out) const {
  out.resize(n + 1);
  out[0] = p;
  if (kind_ == Kind::PeriodicOrbit) {
    const std::size_t m = points_.size();
    const std::size_t start = index_of(p);
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t step = k % m;
      out[k] = points_[dir == Direction::Forward ? (start + step) % m : (start + m - step) % m];
    }
    return;
  }
  for (std::size_t k = 1; k <= n; ++k) {
    out[k] = dir == Direction::Forward ? forward(out[k - 1]) : backward(out[k - 1]);
  }
}

std::string BaseSystem::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Identity:
      os << "identity(dim=" << dim_ << ")";
      break;
    case Kind::Rotation:
      os << "rotation(rho=" << rho_ << ")";
      break;
    case Kind::TorusMap:
      os << "torus_map";
      break;
    case Kind::PeriodicOrbit:
      os << "periodic_orbit(period=" << points_.size() << ")";
      break;
  }
  return os.str();
}

std::vector<BasePoint> torus_orbit_m1() { return {BasePoint(0.25, 0.25), BasePoint(0.75, 0.75)}; }

std::vector<BasePoint> torus_orbit_m2() { return {BasePoint(0.25, 0.75), BasePoint(0.75, 0.25)}; }

bool is_invariant_set(const BaseSystem& system, std::span<const BasePoint> set, double tol) {
  for (const auto& p : set) {
    const BasePoint image = system.forward(p);
    bool hit = false;
    for (const auto& q : set) {
      if (torus_distance(image, q) <= tol) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace skewsn
