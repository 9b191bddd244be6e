#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skewsn/base_system.hpp"
#include "skewsn/fibre_family.hpp"
#include "skewsn/graph_engine.hpp"

namespace skewsn {

enum class Existence { Exists, Escaped, Undecided };

std::string to_string(Existence e);

class PreconditionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotInvariant : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExistenceOptions {
  DepthSchedule schedule{64, 1'000'000, 1e-10};
  EngineOptions engine{};
};

struct ExistenceReport {
  Existence verdict = Existence::Undecided;
  std::size_t depth = 0;  // deepest pullback evaluated
  std::size_t escaped = 0;
  std::size_t converged = 0;
  std::size_t undecided = 0;
};

/// Escaped as soon as the attracting bounding graph leaves Gamma at any sample; Exists when the
/// depth schedule converged everywhere; Undecided when the budget ran out mid-transient.
ExistenceReport existence_report(const BaseSystem& system, const FibreFamily& family, double beta,
                                 std::span<const BasePoint> samples,
                                 const ExistenceOptions& options = {});

Existence has_invariant_graph(const BaseSystem& system, const FibreFamily& family, double beta,
                              std::span<const BasePoint> samples,
                              const ExistenceOptions& options = {});

/// Exists when at least one sample keeps a bounded attracting pullback (B(beta) nonempty at
/// sample resolution), Escaped when every sample escaped, Undecided otherwise.
Existence has_bounded_orbit(const BaseSystem& system, const FibreFamily& family, double beta,
                            std::span<const BasePoint> samples,
                            const ExistenceOptions& options = {});

enum class BifurcationMethod { Bisection, ClosedForm };

std::string to_string(BifurcationMethod m);

struct BifurcationResult {
  double beta_c = 0.0;
  Interval bracket;
  double tol = 0.0;
  std::size_t existence_depth = 0;
  std::optional<std::string> restricted_to;
  BifurcationMethod method = BifurcationMethod::Bisection;
  std::size_t samples = 0;
  std::size_t n_max = 0;
  std::size_t evaluations = 0;
};

struct BifurcationOptions {
  double tol = 1e-4;
  Interval beta_range{0.0, 1.0};
  ExistenceOptions existence{};
};

/// Bisection on "every sample keeps a bounded attracting pullback". Undecided verdicts count
/// as existence. Throws PreconditionFailed unless the lower end of beta_range has an invariant
/// graph and the upper end escapes.
BifurcationResult find_beta_c(const BaseSystem& system, const FibreFamily& family,
                              std::span<const BasePoint> samples,
                              const BifurcationOptions& options = {});

/// Bisection on "some sample keeps a bounded attracting pullback": the last parameter at which
/// Gamma-bounded orbits survive.
BifurcationResult find_beta_hat(const BaseSystem& system, const FibreFamily& family,
                                std::span<const BasePoint> samples,
                                const BifurcationOptions& options = {});

/// A compact invariant subset of the base: either one periodic orbit, or a long orbit segment
/// standing in for an invariant circle.
struct InvariantSet {
  std::string label;
  std::vector<BasePoint> points;
  bool orbit_segment = false;
};

/// n_points consecutive forward iterates of `seed`, labelled with the seed.
InvariantSet orbit_segment(const BaseSystem& system, const BasePoint& seed, std::size_t n_points);

/// Throws NotInvariant when a finite set is not a single periodic orbit of `system`, or when an
/// orbit segment is not a forward orbit.
BifurcationResult find_beta_c_restricted(const BaseSystem& system, const FibreFamily& family,
                                         const InvariantSet& set,
                                         const BifurcationOptions& options = {});

struct SweepRow {
  double beta = 0.0;
  std::optional<double> min_gap;
  std::optional<double> lambda_upper;
  std::optional<double> lambda_lower;
  double fraction_bounded = 0.0;
};

struct SweepOptions {
  std::size_t depth = 10'000;
  std::size_t lyapunov_steps = 10'000;
  std::size_t lyapunov_sample = 0;  // index into samples used as theta0
  EngineOptions engine{};
};

/// One row per beta (grid must be ascending). Lyapunov exponents are reported only when
/// neither bounding graph escaped at any sample.
std::vector<SweepRow> sweep(const BaseSystem& system, const FibreFamily& family,
                            std::span<const double> beta_grid, std::span<const BasePoint> samples,
                            const SweepOptions& options = {});

}  // namespace skewsn
