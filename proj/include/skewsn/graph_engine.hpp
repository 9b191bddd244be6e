#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skewsn/base_system.hpp"
#include "skewsn/fibre_family.hpp"

namespace skewsn {

enum class GraphSide { Lower, Upper };

std::string to_string(GraphSide side);

/// True when `side` is obtained by pushing its boundary curve forward (the attracting
/// bounding graph); false when it needs fibre inverses. Concave families attract from
/// above, convex from below. Degenerate families pull both sides forward.
bool pulls_forward(Orientation orientation, GraphSide side);

/// The bounding graph that is computed by forward pullback for this orientation.
GraphSide attracting_side(Orientation orientation);

inline constexpr double kDefaultEscapeMargin = 0.5;

/// nullopt marks an escaped sample.
using GraphValue = std::optional<double>;

struct EngineOptions {
  double escape_margin = kDefaultEscapeMargin;
  std::size_t threads = 0;
};

class GraphEscaped : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MismatchedFields : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The depth-n iterate of the graph transform started on the boundary curve of `which`,
/// evaluated exactly at theta (no interpolation). Forward sides apply n fibre maps along the
/// backward base orbit; inverse sides apply n fibre inverses along the forward orbit.
GraphValue pullback_graph_point(const BaseSystem& system, const FibreFamily& family, double beta,
                                const BasePoint& theta, std::size_t n, GraphSide which,
                                double margin = kDefaultEscapeMargin);

struct GraphField {
  std::vector<BasePoint> samples;
  std::vector<GraphValue> values;
  std::size_t depth = 0;
  GraphSide which = GraphSide::Upper;
  double beta = 0.0;

  std::size_t size() const { return samples.size(); }
  std::size_t escaped_count() const;
  bool any_escaped() const { return escaped_count() > 0; }
  bool all_escaped() const { return escaped_count() == size(); }
};

GraphField compute_graph_field(const BaseSystem& system, const FibreFamily& family, double beta,
                               std::span<const BasePoint> samples, std::size_t depth,
                               GraphSide which, const EngineOptions& options = {});

/// Depth doubles from `start` until the sample-wise change between successive depths drops
/// below `tol_change` or the depth would exceed `max_depth`.
struct DepthSchedule {
  std::size_t start = 64;
  std::size_t max_depth = 1'000'000;
  double tol_change = 1e-10;
};

enum class SampleStatus { Converged, Escaped, Undecided };

struct AdaptiveField {
  GraphField field;  // field.depth is the largest depth used at any sample
  std::vector<SampleStatus> status;
  std::vector<std::size_t> sample_depth;
  bool stopped_early = false;  // an escape ended the schedule before all samples settled

  std::size_t count(SampleStatus s) const;
};

/// With `stop_on_escape`, returns as soon as any sample escapes; the remaining samples are
/// then left Undecided with their last values.
AdaptiveField compute_graph_field_adaptive(const BaseSystem& system, const FibreFamily& family,
                                           double beta, std::span<const BasePoint> samples,
                                           GraphSide which, const DepthSchedule& schedule,
                                           const EngineOptions& options = {},
                                           bool stop_on_escape = false);

struct OrbitPoint {
  BasePoint theta;
  double x = 0.0;
};

/// n forward steps of the skew product starting at (theta, x). No escape checks.
OrbitPoint iterate_forward(const BaseSystem& system, const FibreFamily& family, double beta,
                           OrbitPoint start, std::size_t n);

/// max over non-escaped samples of |f(v(theta)) - v(omega(theta))|, where the right-hand side
/// is recomputed by pullback at the field's depth.
double invariance_residual(const BaseSystem& system, const FibreFamily& family,
                           const GraphField& field, const EngineOptions& options = {});

struct LyapunovOptions {
  std::size_t steps = 100'000;
  std::size_t depth = 0;  // 0: adaptive at theta0 (tol 1e-12, max 1e6)
  double escape_margin = kDefaultEscapeMargin;
};

/// Birkhoff average of log f'(phi) along the forward orbit of theta0, where phi is the
/// bounding graph `which`. Each graph value is a pullback of depth at least options.depth.
/// Throws GraphEscaped when the graph escapes anywhere on the orbit segment.
double lyapunov(const BaseSystem& system, const FibreFamily& family, double beta,
                const BasePoint& theta0, GraphSide which, const LyapunovOptions& options = {});

enum class PinchClass { UniformlySeparated, WeaklyPinched, Collapsed };

std::string to_string(PinchClass c);

struct PinchingThresholds {
  double tol_pinch = 1e-3;
  double tol_collapse = 1e-9;
};

struct PinchingReport {
  double min_gap = 0.0;
  BasePoint argmin;
  PinchClass classification = PinchClass::UniformlySeparated;
  double delta = 0.0;  // separation bound; equals min_gap when uniformly separated
  double median_gap = 0.0;
  double max_gap = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_compared = 0;  // samples where neither graph escaped
  std::size_t depth = 0;
  double beta = 0.0;
  PinchingThresholds thresholds;
  /// Empirical fraction of samples with gap < delta, for a decade grid of delta.
  std::vector<std::pair<double, double>> fraction_below;
};

/// Throws MismatchedFields when sample sets, beta or escape masks disagree, and
/// std::domain_error when every sample escaped.
PinchingReport pinching_report(const GraphField& lower, const GraphField& upper,
                               const PinchingThresholds& thresholds = {});

struct IntervalField {
  std::vector<BasePoint> samples;
  std::vector<std::optional<Interval>> intervals;  // nullopt: empty fibre section
  std::size_t depth = 0;
  double beta = 0.0;

  std::size_t bounded_count() const;
  double fraction_bounded() const;
};

/// Fibre sections [phi-(theta), phi+(theta)] of the set of Gamma-bounded orbits at a fixed depth.
IntervalField bounded_set(const BaseSystem& system, const FibreFamily& family, double beta,
                          std::span<const BasePoint> samples, std::size_t depth,
                          const EngineOptions& options = {});

IntervalField make_interval_field(const GraphField& lower, const GraphField& upper);

struct Contraction {
  std::size_t steps = 0;
  double alpha_bound = 0.0;
};

/// Smallest N <= max_steps with sup over the field of the N-step fibre derivative below one.
/// Forward-pulled sides use f^N along the forward orbit; inverse sides use (f^{-1})^N along the
/// backward orbit. nullopt when no such N exists or the field has escaped samples.
std::optional<Contraction> contraction_check(const BaseSystem& system, const FibreFamily& family,
                                             double beta, const GraphField& field,
                                             std::size_t max_steps);

/// Same for a bounded set; each interval is probed at both ends and its midpoint with f^N.
std::optional<Contraction> contraction_check(const BaseSystem& system, const FibreFamily& family,
                                             double beta, const IntervalField& field,
                                             std::size_t max_steps);

}  // namespace skewsn
