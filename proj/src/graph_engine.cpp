#include "skewsn/graph_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewsn/parallel.hpp"

namespace skewsn {

namespace {

bool in_range(const FibreFamily& family, const BasePoint& theta, double x, double margin) {
  return x >= family.gamma_lower(theta) - margin && x <= family.gamma_upper(theta) + margin;
}

double boundary(const FibreFamily& family, GraphSide side, const BasePoint& theta) {
  return side == GraphSide::Upper ? family.gamma_upper(theta) : family.gamma_lower(theta);
}

std::vector<BasePoint>& orbit_buffer() {
  thread_local std::vector<BasePoint> buffer;
  return buffer;
}

GraphValue pull_forward(const BaseSystem& system, const FibreFamily& family, double beta,
                        const BasePoint& theta, std::size_t n, GraphSide side, double margin) {
  auto& orbit = orbit_buffer();
  system.orbit_into(theta, n, Direction::Backward, orbit);
  double x = boundary(family, side, orbit[n]);
  for (std::size_t k = n; k > 0; --k) {
    x = family.eval(beta, orbit[k], x);
    if (!in_range(family, orbit[k - 1], x, margin)) return std::nullopt;
  }
  return x;
}

GraphValue pull_inverse(const BaseSystem& system, const FibreFamily& family, double beta,
                        const BasePoint& theta, std::size_t n, GraphSide side, double margin) {
  auto& orbit = orbit_buffer();
  system.orbit_into(theta, n, Direction::Forward, orbit);
  double x = boundary(family, side, orbit[n]);
  for (std::size_t k = n; k > 0; --k) {
    const auto pre = family.inverse(beta, orbit[k - 1], x);
    if (!pre || !in_range(family, orbit[k - 1], *pre, margin)) return std::nullopt;
    x = *pre;
  }
  return x;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

void check_same_samples(std::span<const BasePoint> a, std::span<const BasePoint> b,
                        double beta_a, double beta_b) {
  if (a.size() != b.size()) throw MismatchedFields("graph fields have different sample counts");
  if (beta_a != beta_b) throw MismatchedFields("graph fields computed at different beta");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) throw MismatchedFields("graph fields have different sample points");
  }
}

}  // namespace

std::string to_string(GraphSide side) { return side == GraphSide::Upper ? "upper" : "lower"; }

bool pulls_forward(Orientation orientation, GraphSide side) {
  switch (orientation) {
    case Orientation::ConcaveDecreasing:
      return side == GraphSide::Upper;
    case Orientation::ConvexIncreasing:
      return side == GraphSide::Lower;
    case Orientation::None:
      return true;
  }
  return true;
}

GraphSide attracting_side(Orientation orientation) {
  return orientation == Orientation::ConvexIncreasing ? GraphSide::Lower : GraphSide::Upper;
}

GraphValue pullback_graph_point(const BaseSystem& system, const FibreFamily& family, double beta,
                                const BasePoint& theta, std::size_t n, GraphSide which,
                                double margin) {
  if (pulls_forward(family.orientation(), which)) {
    return pull_forward(system, family, beta, theta, n, which, margin);
  }
  return pull_inverse(system, family, beta, theta, n, which, margin);
}

std::size_t GraphField::escaped_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](const GraphValue& v) { return !v; }));
}

GraphField compute_graph_field(const BaseSystem& system, const FibreFamily& family, double beta,
                               std::span<const BasePoint> samples, std::size_t depth,
                               GraphSide which, const EngineOptions& options) {
  GraphField field;
  field.samples.assign(samples.begin(), samples.end());
  field.values.resize(samples.size());
  field.depth = depth;
  field.which = which;
  field.beta = beta;
  parallel_for(samples.size(), options.threads, [&](std::size_t i) {
    field.values[i] = pullback_graph_point(system, family, beta, samples[i], depth, which,
                                           options.escape_margin);
  });
  return field;
}

std::size_t AdaptiveField::count(SampleStatus s) const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), s));
}

AdaptiveField compute_graph_field_adaptive(const BaseSystem& system, const FibreFamily& family,
                                           double beta, std::span<const BasePoint> samples,
                                           GraphSide which, const DepthSchedule& schedule,
                                           const EngineOptions& options, bool stop_on_escape) {
  const std::size_t m = samples.size();
  AdaptiveField out;
  out.field.samples.assign(samples.begin(), samples.end());
  out.field.values.assign(m, std::nullopt);
  out.field.which = which;
  out.field.beta = beta;
  out.status.assign(m, SampleStatus::Undecided);
  out.sample_depth.assign(m, 0);

  std::size_t depth = std::max<std::size_t>(1, std::min(schedule.start, schedule.max_depth));
  std::vector<std::size_t> active(m);
  for (std::size_t i = 0; i < m; ++i) active[i] = i;
  std::vector<GraphValue> level(m);
  bool first = true;

  while (!active.empty()) {
    parallel_for(active.size(), options.threads, [&](std::size_t j) {
      const std::size_t i = active[j];
      level[j] = pullback_graph_point(system, family, beta, samples[i], depth, which,
                                      options.escape_margin);
    });
    out.field.depth = depth;
    std::vector<std::size_t> still;
    bool escaped_any = false;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const std::size_t i = active[j];
      out.sample_depth[i] = depth;
      if (!level[j]) {
        out.status[i] = SampleStatus::Escaped;
        out.field.values[i] = std::nullopt;
        escaped_any = true;
        continue;
      }
      const GraphValue previous = out.field.values[i];
      out.field.values[i] = level[j];
      if (!first && std::abs(*level[j] - *previous) < schedule.tol_change) {
        out.status[i] = SampleStatus::Converged;
      } else {
        still.push_back(i);
      }
    }
    if (escaped_any && stop_on_escape) {
      out.stopped_early = !still.empty();
      break;
    }
    active = std::move(still);
    first = false;
    if (depth >= schedule.max_depth) break;
    depth = std::min(2 * depth, schedule.max_depth);
  }
  return out;
}

OrbitPoint iterate_forward(const BaseSystem& system, const FibreFamily& family, double beta,
                           OrbitPoint start, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    start.x = family.eval(beta, start.theta, start.x);
    start.theta = system.forward(start.theta);
  }
  return start;
}

double invariance_residual(const BaseSystem& system, const FibreFamily& family,
                           const GraphField& field, const EngineOptions& options) {
  std::vector<double> residual(field.size(), 0.0);
  parallel_for(field.size(), options.threads, [&](std::size_t i) {
    if (!field.values[i]) return;
    const BasePoint next = system.forward(field.samples[i]);
    const auto rhs = pullback_graph_point(system, family, field.beta, next, field.depth,
                                          field.which, options.escape_margin);
    if (!rhs) return;
    residual[i] = std::abs(family.eval(field.beta, field.samples[i], *field.values[i]) - *rhs);
  });
  double worst = 0.0;
  for (double r : residual) worst = std::max(worst, r);
  return worst;
}

double lyapunov(const BaseSystem& system, const FibreFamily& family, double beta,
                const BasePoint& theta0, GraphSide which, const LyapunovOptions& options) {
  std::size_t depth = options.depth;
  if (depth == 0) {
    const DepthSchedule schedule{64, 1'000'000, 1e-12};
    const BasePoint one[] = {theta0};
    const auto probe = compute_graph_field_adaptive(system, family, beta, one, which, schedule,
                                                    {options.escape_margin, 1}, true);
    if (probe.status[0] == SampleStatus::Escaped) {
      throw GraphEscaped(to_string(which) + " graph escaped at " + to_string(theta0));
    }
    depth = probe.sample_depth[0];
  }
  const std::size_t n = options.steps;
  if (n == 0) throw std::invalid_argument("lyapunov: need at least one step");
  const double margin = options.escape_margin;
  double sum = 0.0;

  if (pulls_forward(family.orientation(), which)) {
    // Continuing the depth-d pullback forward gives the depth-(d + k) pullback at theta_k.
    const auto start = pull_forward(system, family, beta, theta0, depth, which, margin);
    if (!start) throw GraphEscaped(to_string(which) + " graph escaped at " + to_string(theta0));
    double x = *start;
    BasePoint theta = theta0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += std::log(family.deriv_x(beta, theta, x));
      x = family.eval(beta, theta, x);
      theta = system.forward(theta);
      if (!in_range(family, theta, x, margin)) {
        throw GraphEscaped(to_string(which) + " graph escaped along the orbit");
      }
    }
    return sum / static_cast<double>(n);
  }

  // One backward sweep from theta_{n + d}: the value reached at theta_k is the pullback of
  // depth n + d - k >= d.
  const auto orbit = system.orbit(theta0, n + depth, Direction::Forward);
  double x = boundary(family, which, orbit.back());
  for (std::size_t k = n + depth; k > 0; --k) {
    const auto pre = family.inverse(beta, orbit[k - 1], x);
    if (!pre || !in_range(family, orbit[k - 1], *pre, margin)) {
      throw GraphEscaped(to_string(which) + " graph escaped along the orbit");
    }
    x = *pre;
    if (k - 1 < n) sum += std::log(family.deriv_x(beta, orbit[k - 1], x));
  }
  return sum / static_cast<double>(n);
}

std::string to_string(PinchClass c) {
  switch (c) {
    case PinchClass::UniformlySeparated:
      return "uniformly_separated";
    case PinchClass::WeaklyPinched:
      return "weakly_pinched";
    case PinchClass::Collapsed:
      return "collapsed";
  }
  return "uniformly_separated";
}

PinchingReport pinching_report(const GraphField& lower, const GraphField& upper,
                               const PinchingThresholds& thresholds) {
  check_same_samples(lower.samples, upper.samples, lower.beta, upper.beta);
  std::vector<double> gaps;
  gaps.reserve(lower.size());
  PinchingReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower.values[i].has_value() != upper.values[i].has_value()) {
      throw MismatchedFields("escape masks of the lower and upper graph disagree at " +
                             to_string(lower.samples[i]));
    }
    if (!lower.values[i]) continue;
    const double gap = std::max(0.0, *upper.values[i] - *lower.values[i]);
    gaps.push_back(gap);
    if (gap < report.min_gap) {
      report.min_gap = gap;
      report.argmin = lower.samples[i];
    }
  }
  if (gaps.empty()) throw std::domain_error("pinching report: every sample escaped");

  report.n_samples = lower.size();
  report.n_compared = gaps.size();
  report.depth = std::max(lower.depth, upper.depth);
  report.beta = lower.beta;
  report.thresholds = thresholds;
  report.max_gap = *std::max_element(gaps.begin(), gaps.end());
  if (report.min_gap < thresholds.tol_collapse) {
    report.classification = PinchClass::Collapsed;
  } else if (report.min_gap < thresholds.tol_pinch) {
    report.classification = PinchClass::WeaklyPinched;
  } else {
    report.classification = PinchClass::UniformlySeparated;
    report.delta = report.min_gap;
  }
  for (int e = 1; e <= 9; ++e) {
    const double delta = std::pow(10.0, -e);
    const auto below = std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g < delta; });
    report.fraction_below.emplace_back(delta,
                                       static_cast<double>(below) / static_cast<double>(gaps.size()));
  }
  report.median_gap = median_of(std::move(gaps));
  return report;
}

std::size_t IntervalField::bounded_count() const {
  return static_cast<std::size_t>(std::count_if(
      intervals.begin(), intervals.end(), [](const auto& iv) { return iv.has_value(); }));
}

double IntervalField::fraction_bounded() const {
  if (intervals.empty()) return 0.0;
  return static_cast<double>(bounded_count()) / static_cast<double>(intervals.size());
}

IntervalField make_interval_field(const GraphField& lower, const GraphField& upper) {
  check_same_samples(lower.samples, upper.samples, lower.beta, upper.beta);
  IntervalField out;
  out.samples = lower.samples;
  out.depth = std::max(lower.depth, upper.depth);
  out.beta = lower.beta;
  out.intervals.resize(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!lower.values[i] || !upper.values[i]) continue;
    // Crossed finite-depth bounds enclose no bounded orbit.
    if (*lower.values[i] > *upper.values[i]) continue;
    out.intervals[i] = Interval{*lower.values[i], *upper.values[i]};
  }
  return out;
}

IntervalField bounded_set(const BaseSystem& system, const FibreFamily& family, double beta,
                          std::span<const BasePoint> samples, std::size_t depth,
                          const EngineOptions& options) {
  const auto lower =
      compute_graph_field(system, family, beta, samples, depth, GraphSide::Lower, options);
  const auto upper =
      compute_graph_field(system, family, beta, samples, depth, GraphSide::Upper, options);
  return make_interval_field(lower, upper);
}

namespace {

// sup[N - 1] accumulates the largest N-step derivative seen so far.
void forward_products(const BaseSystem& system, const FibreFamily& family, double beta,
                      BasePoint theta, double x, std::vector<double>& sup) {
  double product = 1.0;
  for (std::size_t k = 0; k < sup.size(); ++k) {
    product *= family.deriv_x(beta, theta, x);
    x = family.eval(beta, theta, x);
    theta = system.forward(theta);
    sup[k] = std::max(sup[k], product);
  }
}

bool inverse_products(const BaseSystem& system, const FibreFamily& family, double beta,
                      BasePoint theta, double y, std::vector<double>& sup) {
  double product = 1.0;
  for (std::size_t k = 0; k < sup.size(); ++k) {
    theta = system.backward(theta);
    const auto x = family.inverse(beta, theta, y);
    if (!x) return false;
    product /= family.deriv_x(beta, theta, *x);
    y = *x;
    sup[k] = std::max(sup[k], product);
  }
  return true;
}

std::optional<Contraction> first_contracting(const std::vector<double>& sup) {
  for (std::size_t k = 0; k < sup.size(); ++k) {
    if (sup[k] < 1.0) return Contraction{k + 1, sup[k]};
  }
  return std::nullopt;
}

}  // namespace

std::optional<Contraction> contraction_check(const BaseSystem& system, const FibreFamily& family,
                                             double beta, const GraphField& field,
                                             std::size_t max_steps) {
  if (field.any_escaped() || max_steps == 0) return std::nullopt;
  std::vector<double> sup(max_steps, 0.0);
  const bool forward = pulls_forward(family.orientation(), field.which);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (forward) {
      forward_products(system, family, beta, field.samples[i], *field.values[i], sup);
    } else if (!inverse_products(system, family, beta, field.samples[i], *field.values[i], sup)) {
      return std::nullopt;
    }
  }
  return first_contracting(sup);
}

std::optional<Contraction> contraction_check(const BaseSystem& system, const FibreFamily& family,
                                             double beta, const IntervalField& field,
                                             std::size_t max_steps) {
  if (max_steps == 0 || field.bounded_count() != field.intervals.size()) return std::nullopt;
  std::vector<double> sup(max_steps, 0.0);
  for (std::size_t i = 0; i < field.intervals.size(); ++i) {
    const Interval& iv = *field.intervals[i];
    for (double x : {iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi}) {
      forward_products(system, family, beta, field.samples[i], x, sup);
    }
  }
  return first_contracting(sup);
}

}  // namespace skewsn
