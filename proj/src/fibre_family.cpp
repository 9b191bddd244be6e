#include "skewsn/fibre_family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace skewsn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double arctan_deriv_x(double alpha, double x) {
  const double ax = alpha * x;
  return alpha / (1.0 + ax * ax);
}

double arctan_deriv_xx(double alpha, double x) {
  const double ax = alpha * x;
  const double d = 1.0 + ax * ax;
  return -2.0 * alpha * alpha * alpha * x / (d * d);
}

std::optional<double> arctan_inverse(double alpha, double shift, double y) {
  const double s = y + shift;
  if (!(s > -kHalfPi && s < kHalfPi)) return std::nullopt;
  return std::tan(s) / alpha;
}

// Index of the segment used for x, clamped to the end segments.
std::size_t table_segment(const std::vector<double>& xs, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

}  // namespace

std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::ConcaveDecreasing:
      return "concave_decreasing_in_beta";
    case Orientation::ConvexIncreasing:
      return "convex_increasing_in_beta";
    case Orientation::None:
      return "none";
  }
  return "none";
}

FibreFamily::FibreFamily(Model model, Orientation orientation, Interval bounds, int base_dim)
    : model_(std::make_shared<const Model>(std::move(model))),
      orientation_(orientation),
      bounds_(bounds),
      base_dim_(base_dim) {
  if (!(bounds.lo < bounds.hi)) throw std::invalid_argument("fibre family: need gamma- < gamma+");
}

FibreFamily FibreFamily::arctan_1d(double alpha, double gamma, Interval bounds) {
  if (!(alpha > 0.0)) throw std::invalid_argument("arctan family: alpha must be positive");
  FibreFamily f(Arctan1D{alpha, gamma}, Orientation::ConcaveDecreasing, bounds, 1);
  f.validate_orientation();
  return f;
}

FibreFamily FibreFamily::arctan_2d(double alpha, double gamma, Interval bounds) {
  if (!(alpha > 0.0)) throw std::invalid_argument("arctan family: alpha must be positive");
  FibreFamily f(Arctan2D{alpha, gamma}, Orientation::ConcaveDecreasing, bounds, 2);
  f.validate_orientation();
  return f;
}

FibreFamily FibreFamily::affine(double slope, double c0, double c1, double beta_coeff,
                                Interval bounds) {
  if (!(slope > 0.0)) throw std::invalid_argument("affine family: slope must be positive");
  return FibreFamily(Affine{slope, c0, c1, beta_coeff}, Orientation::None, bounds, 0);
}

FibreFamily FibreFamily::table(std::vector<double> xs, std::vector<double> ys, double beta_coeff,
                               Interval bounds) {
  if (xs.size() < 2 || xs.size() != ys.size()) {
    throw std::invalid_argument("table family: need at least two knots and matching sizes");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1]) || !(ys[i] > ys[i - 1])) {
      throw std::invalid_argument("table family: knots must be strictly increasing in x and y");
    }
  }
  return FibreFamily(Table{std::move(xs), std::move(ys), beta_coeff}, Orientation::None, bounds, 0);
}

FibreFamily FibreFamily::custom(std::shared_ptr<const FibreModel> model, Orientation orientation,
                                Interval bounds, int base_dim) {
  if (!model) throw std::invalid_argument("custom family: null model");
  FibreFamily f(Custom{std::move(model)}, orientation, bounds, base_dim);
  f.validate_orientation();
  return f;
}

FibreFamily FibreFamily::mirrored() const {
  FibreFamily f = *this;
  f.mirrored_ = !mirrored_;
  f.bounds_ = Interval{-bounds_.hi, -bounds_.lo};
  if (orientation_ == Orientation::ConcaveDecreasing) {
    f.orientation_ = Orientation::ConvexIncreasing;
  } else if (orientation_ == Orientation::ConvexIncreasing) {
    f.orientation_ = Orientation::ConcaveDecreasing;
  }
  return f;
}

double FibreFamily::raw_eval(double beta, const BasePoint& theta, double x) const {
  return std::visit(
      Overloaded{
          [&](const Arctan1D& m) {
            return std::atan(m.alpha * x) - 2.0 * beta -
                   m.gamma * (std::sin(kTwoPi * theta[0]) + 1.0);
          },
          [&](const Arctan2D& m) {
            return std::atan(m.alpha * x) - 2.0 * beta -
                   m.gamma * (std::sin(kTwoPi * theta[0]) * std::sin(kTwoPi * theta[1]) + 1.0);
          },
          [&](const Affine& m) {
            return m.slope * x + m.c0 + m.c1 * std::sin(kTwoPi * theta[0]) - m.beta_coeff * beta;
          },
          [&](const Table& m) {
            const std::size_t i = table_segment(m.xs, x);
            const double t = (x - m.xs[i]) / (m.xs[i + 1] - m.xs[i]);
            return m.ys[i] + t * (m.ys[i + 1] - m.ys[i]) - m.beta_coeff * beta;
          },
          [&](const Custom& m) { return m.model->eval(beta, theta, x); },
      },
      *model_);
}

double FibreFamily::raw_deriv_x(double beta, const BasePoint& theta, double x) const {
  return std::visit(
      Overloaded{
          [&](const Arctan1D& m) { return arctan_deriv_x(m.alpha, x); },
          [&](const Arctan2D& m) { return arctan_deriv_x(m.alpha, x); },
          [&](const Affine& m) { return m.slope; },
          [&](const Table& m) {
            const std::size_t i = table_segment(m.xs, x);
            return (m.ys[i + 1] - m.ys[i]) / (m.xs[i + 1] - m.xs[i]);
          },
          [&](const Custom& m) { return m.model->deriv_x(beta, theta, x); },
      },
      *model_);
}

double FibreFamily::raw_deriv_xx(double beta, const BasePoint& theta, double x) const {
  return std::visit(Overloaded{
                        [&](const Arctan1D& m) { return arctan_deriv_xx(m.alpha, x); },
                        [&](const Arctan2D& m) { return arctan_deriv_xx(m.alpha, x); },
                        [&](const Affine&) { return 0.0; },
                        [&](const Table&) { return 0.0; },
                        [&](const Custom& m) { return m.model->deriv_xx(beta, theta, x); },
                    },
                    *model_);
}

double FibreFamily::raw_deriv_beta(double beta, const BasePoint& theta, double x) const {
  return std::visit(Overloaded{
                        [&](const Arctan1D&) { return -2.0; },
                        [&](const Arctan2D&) { return -2.0; },
                        [&](const Affine& m) { return -m.beta_coeff; },
                        [&](const Table& m) { return -m.beta_coeff; },
                        [&](const Custom& m) { return m.model->deriv_beta(beta, theta, x); },
                    },
                    *model_);
}

std::optional<double> FibreFamily::raw_inverse(double beta, const BasePoint& theta,
                                               double y) const {
  return std::visit(
      Overloaded{
          [&](const Arctan1D& m) -> std::optional<double> {
            return arctan_inverse(m.alpha,
                                  2.0 * beta + m.gamma * (std::sin(kTwoPi * theta[0]) + 1.0), y);
          },
          [&](const Arctan2D& m) -> std::optional<double> {
            return arctan_inverse(
                m.alpha,
                2.0 * beta +
                    m.gamma * (std::sin(kTwoPi * theta[0]) * std::sin(kTwoPi * theta[1]) + 1.0),
                y);
          },
          [&](const Affine& m) -> std::optional<double> {
            return (y - m.c0 - m.c1 * std::sin(kTwoPi * theta[0]) + m.beta_coeff * beta) / m.slope;
          },
          [&](const Table&) { return bisect_inverse(beta, theta, y); },
          [&](const Custom& m) { return m.model->inverse(beta, theta, y); },
      },
      *model_);
}

// Monotone bisection over Gamma widened by ten times its width on both sides.
std::optional<double> FibreFamily::bisect_inverse(double beta, const BasePoint& theta,
                                                  double y) const {
  const Interval raw = mirrored_ ? Interval{-bounds_.hi, -bounds_.lo} : bounds_;
  double a = raw.lo - 10.0 * raw.width();
  double b = raw.hi + 10.0 * raw.width();
  const double fa = raw_eval(beta, theta, a);
  const double fb = raw_eval(beta, theta, b);
  if (!(y >= fa && y <= fb)) return std::nullopt;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    if (raw_eval(beta, theta, mid) < y) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double FibreFamily::eval(double beta, const BasePoint& theta, double x) const {
  return mirrored_ ? -raw_eval(beta, theta, -x) : raw_eval(beta, theta, x);
}

double FibreFamily::deriv_x(double beta, const BasePoint& theta, double x) const {
  return mirrored_ ? raw_deriv_x(beta, theta, -x) : raw_deriv_x(beta, theta, x);
}

double FibreFamily::deriv_xx(double beta, const BasePoint& theta, double x) const {
  return mirrored_ ? -raw_deriv_xx(beta, theta, -x) : raw_deriv_xx(beta, theta, x);
}

double FibreFamily::deriv_beta(double beta, const BasePoint& theta, double x) const {
  return mirrored_ ? -raw_deriv_beta(beta, theta, -x) : raw_deriv_beta(beta, theta, x);
}

std::optional<double> FibreFamily::inverse(double beta, const BasePoint& theta, double y) const {
  if (!mirrored_) return raw_inverse(beta, theta, y);
  auto x = raw_inverse(beta, theta, -y);
  if (!x) return std::nullopt;
  return -*x;
}

std::string FibreFamily::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Arctan1D& m) {
                   os << "arctan1d(alpha=" << m.alpha << ", gamma=" << m.gamma << ")";
                 },
                 [&](const Arctan2D& m) {
                   os << "arctan2d(alpha=" << m.alpha << ", gamma=" << m.gamma << ")";
                 },
                 [&](const Affine& m) {
                   os << "affine(slope=" << m.slope << ", c0=" << m.c0 << ", c1=" << m.c1
                      << ", beta_coeff=" << m.beta_coeff << ")";
                 },
                 [&](const Table& m) { os << "table(knots=" << m.xs.size() << ")"; },
                 [&](const Custom& m) { os << "custom(" << m.model->name() << ")"; },
             },
             *model_);
  if (mirrored_) os << " mirrored";
  os << " on [" << bounds_.lo << ", " << bounds_.hi << "]";
  return os.str();
}

void FibreFamily::validate_orientation(std::size_t n_points) const {
  std::mt19937_64 rng(0x5eed'f1b7eULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = base_dim_ == 0 ? 1 : base_dim_;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double beta = unit(rng);
    const BasePoint theta = dim == 1 ? BasePoint(unit(rng)) : BasePoint(unit(rng), unit(rng));
    // Interior points: (lo, hi]. The arctan families are flat in curvature at x = 0.
    const double x = bounds_.hi - unit(rng) * bounds_.width() * (1.0 - 1e-9);
    if (!(deriv_x(beta, theta, x) > 0.0)) {
      throw std::invalid_argument(describe() + ": fibre map not increasing at x=" +
                                  std::to_string(x));
    }
    const double dxx = deriv_xx(beta, theta, x);
    const double db = deriv_beta(beta, theta, x);
    switch (orientation_) {
      case Orientation::ConcaveDecreasing:
        if (!(dxx < 0.0) || !(db < 0.0)) {
          throw std::invalid_argument(describe() +
                                      ": not concave and decreasing in beta at x=" +
                                      std::to_string(x));
        }
        break;
      case Orientation::ConvexIncreasing:
        if (!(dxx > 0.0) || !(db > 0.0)) {
          throw std::invalid_argument(describe() + ": not convex and increasing in beta at x=" +
                                      std::to_string(x));
        }
        break;
      case Orientation::None:
        break;
    }
  }
}

BoundaryCheck check_boundaries(const FibreFamily& family, const BaseSystem& system, double beta,
                               std::span<const BasePoint> samples) {
  BoundaryCheck out;
  const bool convex = family.orientation() == Orientation::ConvexIncreasing;
  const bool none = family.orientation() == Orientation::None;
  for (const auto& theta : samples) {
    const BasePoint next = system.forward(theta);
    const double up = family.eval(beta, theta, family.gamma_upper(theta));
    const double lo = family.eval(beta, theta, family.gamma_lower(theta));
    if (convex) {
      out.upper_ok = out.upper_ok && up >= family.gamma_upper(next);
      out.lower_ok = out.lower_ok && lo >= family.gamma_lower(next);
    } else if (none) {
      out.upper_ok = out.upper_ok && up <= family.gamma_upper(next);
      out.lower_ok = out.lower_ok && lo >= family.gamma_lower(next);
    } else {
      out.upper_ok = out.upper_ok && up <= family.gamma_upper(next);
      out.lower_ok = out.lower_ok && lo <= family.gamma_lower(next);
    }
  }
  if (convex) {
    out.description = "f(gamma+) >= gamma+ and f(gamma-) >= gamma-";
  } else if (none) {
    out.description = "f(gamma+) <= gamma+ and f(gamma-) >= gamma-";
  } else {
    out.description = "f(gamma+) <= gamma+ and f(gamma-) <= gamma-";
  }
  return out;
}

}  // namespace skewsn
