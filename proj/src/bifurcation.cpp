#include "skewsn/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace skewsn {

namespace {

using Verdict = ExistenceReport (*)(const BaseSystem&, const FibreFamily&, double,
                                    std::span<const BasePoint>, const ExistenceOptions&);

ExistenceReport bounded_orbit_report(const BaseSystem& system, const FibreFamily& family,
                                     double beta, std::span<const BasePoint> samples,
                                     const ExistenceOptions& options) {
  const auto field =
      compute_graph_field_adaptive(system, family, beta, samples,
                                   attracting_side(family.orientation()), options.schedule,
                                   options.engine, false);
  ExistenceReport report;
  report.depth = field.field.depth;
  report.escaped = field.count(SampleStatus::Escaped);
  report.converged = field.count(SampleStatus::Converged);
  report.undecided = field.count(SampleStatus::Undecided);
  if (report.converged > 0) {
    report.verdict = Existence::Exists;
  } else if (report.escaped == samples.size()) {
    report.verdict = Existence::Escaped;
  } else {
    report.verdict = Existence::Undecided;
  }
  return report;
}

BifurcationResult bisect(const BaseSystem& system, const FibreFamily& family,
                         std::span<const BasePoint> samples, const BifurcationOptions& options,
                         Verdict verdict) {
  if (samples.empty()) throw std::invalid_argument("bisection: no base samples");
  if (!(options.tol > 0.0)) throw std::invalid_argument("bisection: tol must be positive");
  double lo = options.beta_range.lo;
  double hi = options.beta_range.hi;
  BifurcationResult result;
  result.tol = options.tol;
  result.samples = samples.size();
  result.n_max = options.existence.schedule.max_depth;

  std::size_t depth_used = 0;
  auto escaped = [&](double beta) {
    const ExistenceReport r = verdict(system, family, beta, samples, options.existence);
    depth_used = std::max(depth_used, r.depth);
    ++result.evaluations;
    return r.verdict == Existence::Escaped;
  };
  if (escaped(lo)) {
    std::ostringstream os;
    os << "no bounded invariant graph at beta=" << lo;
    throw PreconditionFailed(os.str());
  }
  if (!escaped(hi)) {
    std::ostringstream os;
    os << "invariant graph does not disappear at beta=" << hi;
    throw PreconditionFailed(os.str());
  }
  while (hi - lo > options.tol) {
    const double mid = 0.5 * (lo + hi);
    if (escaped(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.bracket = Interval{lo, hi};
  result.beta_c = 0.5 * (lo + hi);
  result.existence_depth = depth_used;
  return result;
}

std::vector<BasePoint> order_cycle(const BaseSystem& system, const InvariantSet& set) {
  const auto& pts = set.points;
  std::vector<BasePoint> cycle{pts.front()};
  std::vector<bool> used(pts.size(), false);
  used[0] = true;
  BasePoint current = pts.front();
  for (std::size_t k = 1; k <= pts.size(); ++k) {
    const BasePoint image = system.forward(current);
    std::size_t hit = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (torus_distance(image, pts[i]) <= 1e-9) {
        hit = i;
        break;
      }
    }
    if (hit == pts.size()) {
      throw NotInvariant(set.label + ": image of " + to_string(current) + " is not in the set");
    }
    if (hit == 0) {
      if (cycle.size() != pts.size()) {
        throw NotInvariant(set.label + ": set is not a single periodic orbit");
      }
      return cycle;
    }
    if (used[hit]) throw NotInvariant(set.label + ": set is not a single periodic orbit");
    used[hit] = true;
    cycle.push_back(pts[hit]);
    current = pts[hit];
  }
  throw NotInvariant(set.label + ": orbit does not close");
}

}  // namespace

std::string to_string(Existence e) {
  switch (e) {
    case Existence::Exists:
      return "exists";
    case Existence::Escaped:
      return "escaped";
    case Existence::Undecided:
      return "undecided";
  }
  return "undecided";
}

std::string to_string(BifurcationMethod m) {
  return m == BifurcationMethod::ClosedForm ? "closed_form" : "bisection";
}

ExistenceReport existence_report(const BaseSystem& system, const FibreFamily& family, double beta,
                                 std::span<const BasePoint> samples,
                                 const ExistenceOptions& options) {
  const auto field =
      compute_graph_field_adaptive(system, family, beta, samples,
                                   attracting_side(family.orientation()), options.schedule,
                                   options.engine, true);
  ExistenceReport report;
  report.depth = field.field.depth;
  report.escaped = field.count(SampleStatus::Escaped);
  report.converged = field.count(SampleStatus::Converged);
  report.undecided = field.count(SampleStatus::Undecided);
  if (report.escaped > 0) {
    report.verdict = Existence::Escaped;
  } else if (report.undecided == 0) {
    report.verdict = Existence::Exists;
  } else {
    report.verdict = Existence::Undecided;
  }
  return report;
}

Existence has_invariant_graph(const BaseSystem& system, const FibreFamily& family, double beta,
                              std::span<const BasePoint> samples,
                              const ExistenceOptions& options) {
  return existence_report(system, family, beta, samples, options).verdict;
}

Existence has_bounded_orbit(const BaseSystem& system, const FibreFamily& family, double beta,
                            std::span<const BasePoint> samples,
                            const ExistenceOptions& options) {
  return bounded_orbit_report(system, family, beta, samples, options).verdict;
}

BifurcationResult find_beta_c(const BaseSystem& system, const FibreFamily& family,
                              std::span<const BasePoint> samples,
                              const BifurcationOptions& options) {
  return bisect(system, family, samples, options, &existence_report);
}

BifurcationResult find_beta_hat(const BaseSystem& system, const FibreFamily& family,
                                std::span<const BasePoint> samples,
                                const BifurcationOptions& options) {
  return bisect(system, family, samples, options, &bounded_orbit_report);
}

InvariantSet orbit_segment(const BaseSystem& system, const BasePoint& seed, std::size_t n_points) {
  if (n_points == 0) throw std::invalid_argument("orbit segment: need at least one point");
  InvariantSet set;
  set.label = "orbit_segment" + to_string(seed);
  set.points = system.orbit(seed, n_points - 1, Direction::Forward);
  set.orbit_segment = true;
  return set;
}

BifurcationResult find_beta_c_restricted(const BaseSystem& system, const FibreFamily& family,
                                         const InvariantSet& set,
                                         const BifurcationOptions& options) {
  if (set.points.empty()) throw NotInvariant(set.label + ": empty set");
  BifurcationResult result;
  if (set.orbit_segment) {
    for (std::size_t i = 0; i + 1 < set.points.size(); ++i) {
      if (torus_distance(system.forward(set.points[i]), set.points[i + 1]) > 1e-9) {
        throw NotInvariant(set.label + ": consecutive points are not an orbit");
      }
    }
    result = find_beta_c(system, family, set.points, options);
  } else {
    const auto cycle = order_cycle(system, set);
    const BaseSystem restricted = BaseSystem::periodic_orbit(cycle);
    result = find_beta_c(restricted, family, cycle, options);
  }
  result.restricted_to = set.label;
  return result;
}

std::vector<SweepRow> sweep(const BaseSystem& system, const FibreFamily& family,
                            std::span<const double> beta_grid, std::span<const BasePoint> samples,
                            const SweepOptions& options) {
  if (!std::is_sorted(beta_grid.begin(), beta_grid.end())) {
    throw std::invalid_argument("sweep: beta grid must be ascending");
  }
  if (samples.empty()) throw std::invalid_argument("sweep: no base samples");
  std::vector<SweepRow> rows;
  rows.reserve(beta_grid.size());
  for (double beta : beta_grid) {
    SweepRow row;
    row.beta = beta;
    const auto lower = compute_graph_field(system, family, beta, samples, options.depth,
                                           GraphSide::Lower, options.engine);
    const auto upper = compute_graph_field(system, family, beta, samples, options.depth,
                                           GraphSide::Upper, options.engine);
    const auto bounded = make_interval_field(lower, upper);
    row.fraction_bounded = bounded.fraction_bounded();
    for (const auto& iv : bounded.intervals) {
      if (iv) row.min_gap = std::min(row.min_gap.value_or(iv->width()), iv->width());
    }
    if (!lower.any_escaped() && !upper.any_escaped()) {
      const BasePoint theta0 = samples[std::min(options.lyapunov_sample, samples.size() - 1)];
      LyapunovOptions lyap{options.lyapunov_steps, options.depth, options.engine.escape_margin};
      try {
        row.lambda_upper = lyapunov(system, family, beta, theta0, GraphSide::Upper, lyap);
        row.lambda_lower = lyapunov(system, family, beta, theta0, GraphSide::Lower, lyap);
      } catch (const GraphEscaped&) {
        row.lambda_upper.reset();
        row.lambda_lower.reset();
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace skewsn
