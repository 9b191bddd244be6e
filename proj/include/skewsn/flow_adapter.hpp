#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skewsn/base_system.hpp"
#include "skewsn/fibre_family.hpp"

namespace skewsn::flow {

/// x' = F_beta(theta + t rho_flow, x) over a rotation flow on the circle.
struct ScalarFlowSystem {
  std::string name;
  std::function<double(double beta, double theta, double x)> field;
  std::function<double(double beta, double theta, double x)> field_dx;
  double t0 = 1.0;
  double rho_flow = 0.0;
  Interval bounds{0.0, 2.0};
  double blowup_bound = 1e6;
  /// Fixed RK4 step count for one period t0; 0 until calibrated.
  int steps = 0;

  /// The base map of the time-t0 skew product: rotation by t0 rho_flow.
  BaseSystem time_t0_base() const;
};

/// F = a x + b sin(2 pi theta) - k beta.
ScalarFlowSystem linear_field(double a, double b, double k, double t0, double rho_flow,
                              Interval bounds = {-2.0, 2.0});

/// F = -(x - 1)^2 + c0 + c1 sin(2 pi theta) - beta.
ScalarFlowSystem quadratic_cap_field(double c0, double c1, double t0, double rho_flow,
                                     Interval bounds = {0.0, 2.0});

class Blowup : public std::runtime_error {
 public:
  Blowup(const std::string& what, double last_x) : std::runtime_error(what), last_x_(last_x) {}
  double last_x() const { return last_x_; }

 private:
  double last_x_;
};

class ValidationFailed : public std::runtime_error {
 public:
  explicit ValidationFailed(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct FlowStep {
  double x = 0.0;
  double deriv_x = 1.0;  // exp of the integrated dF/dx along the trajectory
};

/// Classical RK4 on the state and the log-derivative integrand with `steps` equal steps over
/// `duration` (negative durations integrate backwards). The observer, when set, sees every
/// substep (time, x). Throws Blowup when |x| exceeds the system's bound or turns non-finite.
FlowStep integrate(const ScalarFlowSystem& sys, double beta, double theta, double x,
                   double duration, int steps,
                   const std::function<void(double, double)>& observer = {});

/// Smallest power-of-two step count (at least 16) for which halving the step changes the
/// time-t0 state by less than `tol` on a deterministic grid of (beta, theta, x).
int calibrate_steps(const ScalarFlowSystem& sys, double tol = 1e-10);

/// Time-t0 map and its x-derivative. Calibrates the step count on the fly when sys.steps == 0.
FlowStep time_t0_map(const ScalarFlowSystem& sys, double beta, double theta, double x);

/// Validates the induced map by sampling (monotone in x, constant sign of curvature and of the
/// beta derivative, field derivative consistent with finite differences) and wraps it as a fibre
/// family on sys.bounds. Throws ValidationFailed listing every violated condition.
FibreFamily as_fibre_family(ScalarFlowSystem sys);

/// Starting on gamma-/gamma+ the trajectory must stay on the orientation-appropriate side of
/// the (constant) boundary at every substep. Returns the violations found.
std::vector<std::string> check_boundary_trapping(const ScalarFlowSystem& sys,
                                                 Orientation orientation, double beta,
                                                 std::span<const double> thetas);

}  // namespace skewsn::flow
