#include "skewsn/flow_adapter.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

namespace skewsn::flow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string point_text(double beta, double theta, double x) {
  std::ostringstream os;
  os << "(beta=" << beta << ", theta=" << theta << ", x=" << x << ")";
  return os.str();
}

class InducedMap final : public FibreModel {
 public:
  explicit InducedMap(ScalarFlowSystem sys) : sys_(std::move(sys)) {}

  double eval(double beta, const BasePoint& theta, double x) const override {
    try {
      return integrate(sys_, beta, theta[0], x, sys_.t0, sys_.steps).x;
    } catch (const Blowup& b) {
      return b.last_x() < 0.0 ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
    }
  }

  double deriv_x(double beta, const BasePoint& theta, double x) const override {
    try {
      return integrate(sys_, beta, theta[0], x, sys_.t0, sys_.steps).deriv_x;
    } catch (const Blowup&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }

  double deriv_xx(double beta, const BasePoint& theta, double x) const override {
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    return (deriv_x(beta, theta, x + h) - deriv_x(beta, theta, x - h)) / (2.0 * h);
  }

  double deriv_beta(double beta, const BasePoint& theta, double x) const override {
    const double h = 1e-6;
    return (eval(beta + h, theta, x) - eval(beta - h, theta, x)) / (2.0 * h);
  }

  std::optional<double> inverse(double beta, const BasePoint& theta, double y) const override {
    // The preimage over theta is reached by flowing backwards from omega_{t0}(theta).
    const double start = wrap_unit(theta[0] + sys_.t0 * sys_.rho_flow);
    try {
      return integrate(sys_, beta, start, y, -sys_.t0, sys_.steps).x;
    } catch (const Blowup&) {
      return std::nullopt;
    }
  }

  std::string name() const override { return "flow:" + sys_.name; }

 private:
  ScalarFlowSystem sys_;
};

}  // namespace

ValidationFailed::ValidationFailed(std::vector<std::string> violations)
    : std::runtime_error("flow validation failed: " + join(violations)),
      violations_(std::move(violations)) {}

BaseSystem ScalarFlowSystem::time_t0_base() const {
  if (rho_flow == 0.0) return BaseSystem::identity(1);
  return BaseSystem::rotation(t0 * rho_flow);
}

ScalarFlowSystem linear_field(double a, double b, double k, double t0, double rho_flow,
                              Interval bounds) {
  ScalarFlowSystem sys;
  std::ostringstream os;
  os << "linear(a=" << a << ", b=" << b << ", k=" << k << ")";
  sys.name = os.str();
  sys.field = [=](double beta, double theta, double x) {
    return a * x + b * std::sin(kTwoPi * theta) - k * beta;
  };
  sys.field_dx = [=](double, double, double) { return a; };
  sys.t0 = t0;
  sys.rho_flow = rho_flow;
  sys.bounds = bounds;
  return sys;
}

ScalarFlowSystem quadratic_cap_field(double c0, double c1, double t0, double rho_flow,
                                     Interval bounds) {
  ScalarFlowSystem sys;
  std::ostringstream os;
  os << "quadratic_cap(c0=" << c0 << ", c1=" << c1 << ")";
  sys.name = os.str();
  sys.field = [=](double beta, double theta, double x) {
    return -(x - 1.0) * (x - 1.0) + c0 + c1 * std::sin(kTwoPi * theta) - beta;
  };
  sys.field_dx = [](double, double, double x) { return -2.0 * (x - 1.0); };
  sys.t0 = t0;
  sys.rho_flow = rho_flow;
  sys.bounds = bounds;
  return sys;
}

FlowStep integrate(const ScalarFlowSystem& sys, double beta, double theta, double x,
                   double duration, int steps, const std::function<void(double, double)>& observer) {
  if (steps <= 0) throw std::invalid_argument("integrate: step count must be positive");
  const double h = duration / steps;
  const double rho = sys.rho_flow;
  double log_deriv = 0.0;
  auto theta_at = [&](double t) { return theta + t * rho; };
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const double th0 = theta_at(t);
    const double th1 = theta_at(t + 0.5 * h);
    const double th2 = theta_at(t + h);
    const double k1 = sys.field(beta, th0, x);
    const double l1 = sys.field_dx(beta, th0, x);
    const double x2 = x + 0.5 * h * k1;
    const double k2 = sys.field(beta, th1, x2);
    const double l2 = sys.field_dx(beta, th1, x2);
    const double x3 = x + 0.5 * h * k2;
    const double k3 = sys.field(beta, th1, x3);
    const double l3 = sys.field_dx(beta, th1, x3);
    const double x4 = x + h * k3;
    const double k4 = sys.field(beta, th2, x4);
    const double l4 = sys.field_dx(beta, th2, x4);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    log_deriv += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    if (!std::isfinite(x) || std::abs(x) > sys.blowup_bound) {
      throw Blowup(sys.name + ": trajectory left |x| <= " + std::to_string(sys.blowup_bound), x);
    }
    if (observer) observer(t + h, x);
  }
  return FlowStep{x, std::exp(log_deriv)};
}

int calibrate_steps(const ScalarFlowSystem& sys, double tol) {
  const Interval b = sys.bounds;
  for (int steps = 16; steps <= (1 << 20); steps *= 2) {
    double worst = 0.0;
    for (double beta : {0.0, 0.5, 1.0}) {
      for (double theta : {0.0, 0.25, 0.5, 0.75}) {
        for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
          const double x = b.lo + s * b.width();
          try {
            const double coarse = integrate(sys, beta, theta, x, sys.t0, steps).x;
            const double fine = integrate(sys, beta, theta, x, sys.t0, 2 * steps).x;
            worst = std::max(worst, std::abs(fine - coarse));
          } catch (const Blowup&) {
            // Points that leave the domain within one period do not constrain the step.
          }
        }
      }
    }
    if (worst < tol) return 2 * steps;
  }
  throw std::runtime_error(sys.name + ": step calibration did not converge");
}

FlowStep time_t0_map(const ScalarFlowSystem& sys, double beta, double theta, double x) {
  const int steps = sys.steps > 0 ? sys.steps : calibrate_steps(sys);
  return integrate(sys, beta, theta, x, sys.t0, steps);
}

FibreFamily as_fibre_family(ScalarFlowSystem sys) {
  if (!(sys.t0 > 0.0)) throw std::invalid_argument("flow: t0 must be positive");
  if (sys.steps <= 0) sys.steps = calibrate_steps(sys);

  std::vector<std::string> violations;
  const auto model = std::make_shared<InducedMap>(sys);
  const Interval b = sys.bounds;
  int concave = 0, convex = 0, flat = 0, decreasing = 0, increasing = 0;
  bool field_dx_ok = true;
  bool monotone_ok = true;
  for (int ib = 0; ib <= 4; ++ib) {
    const double beta = 0.25 * ib;
    for (int it = 0; it < 5; ++it) {
      const BasePoint theta(0.2 * it + 0.05);
      for (int ix = 1; ix <= 8; ++ix) {
        const double x = b.lo + b.width() * ix / 9.0;
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        const double fd =
            (sys.field(beta, theta[0], x + h) - sys.field(beta, theta[0], x - h)) / (2.0 * h);
        const double an = sys.field_dx(beta, theta[0], x);
        if (field_dx_ok && std::abs(fd - an) > 1e-5 * std::max(1.0, std::abs(an))) {
          field_dx_ok = false;
          violations.push_back("dF/dx disagrees with finite differences at " +
                               point_text(beta, theta[0], x));
        }
        const double d1 = model->deriv_x(beta, theta, x);
        if (monotone_ok && !(d1 > 0.0)) {
          monotone_ok = false;
          violations.push_back("induced map not increasing at " + point_text(beta, theta[0], x));
        }
        const double d2 = model->deriv_xx(beta, theta, x);
        const double db = model->deriv_beta(beta, theta, x);
        if (std::abs(d2) < 1e-8) {
          ++flat;
        } else if (d2 < 0.0) {
          ++concave;
        } else {
          ++convex;
        }
        if (db < 0.0) {
          ++decreasing;
        } else if (db > 0.0) {
          ++increasing;
        }
      }
    }
  }
  if (flat > 0) {
    violations.push_back("curvature of the induced map vanishes (strict convexity/concavity fails)");
  } else if (concave > 0 && convex > 0) {
    violations.push_back("curvature of the induced map changes sign");
  }
  if (decreasing > 0 && increasing > 0) {
    violations.push_back("beta derivative of the induced map changes sign");
  } else if (decreasing == 0 && increasing == 0) {
    violations.push_back("induced map does not depend on beta");
  }
  Orientation orientation = Orientation::None;
  if (violations.empty()) {
    if (concave > 0 && decreasing > 0) {
      orientation = Orientation::ConcaveDecreasing;
    } else if (convex > 0 && increasing > 0) {
      orientation = Orientation::ConvexIncreasing;
    } else {
      violations.push_back(
          "curvature and beta derivative have mismatched signs (need concave/decreasing or "
          "convex/increasing)");
    }
  }
  if (!violations.empty()) throw ValidationFailed(std::move(violations));
  return FibreFamily::custom(model, orientation, sys.bounds, 1);
}

std::vector<std::string> check_boundary_trapping(const ScalarFlowSystem& sys,
                                                 Orientation orientation, double beta,
                                                 std::span<const double> thetas) {
  std::vector<std::string> violations;
  const int steps = sys.steps > 0 ? sys.steps : calibrate_steps(sys);
  const bool concave = orientation != Orientation::ConvexIncreasing;
  for (double theta : thetas) {
    for (double start : {sys.bounds.lo, sys.bounds.hi}) {
      bool ok = true;
      // Concave: both boundaries are pushed down by the flow; convex: pushed up.
      auto observer = [&](double, double x) {
        if (concave ? x > start : x < start) ok = false;
      };
      try {
        integrate(sys, beta, theta, start, sys.t0, steps, observer);
      } catch (const Blowup&) {
      }
      if (!ok) {
        violations.push_back("trajectory from boundary " + std::to_string(start) +
                             " crosses it at " + point_text(beta, theta, start));
      }
    }
  }
  return violations;
}

}  // namespace skewsn::flow
