#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewsn/base_system.hpp"
#include "skewsn/fibre_family.hpp"
#include "skewsn/flow_adapter.hpp"

namespace skewsn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BaseConfig {
  std::string kind = "rotation";  // rotation | torus | identity | periodic
  std::optional<double> rho;      // rotation only; golden mean when absent
  int dim = 1;                    // identity only
  std::vector<std::vector<double>> points;  // periodic only
};

struct FibreConfig {
  std::string kind = "arctan1d";  // arctan1d | arctan2d
  double alpha = 100.0;
  double gamma = 0.5;
  Interval bounds{0.0, 2.0};
  bool mirrored = false;
};

struct FlowConfig {
  double t0 = 0.5;
  double rho_flow = 0.0;
  std::string field = "quadratic_cap";  // linear | quadratic_cap
  std::map<std::string, double> params;
};

struct SampleConfig {
  std::size_t count = 2000;
  std::string placement = "grid";  // grid | halton
  std::uint64_t seed = 0;
};

struct RunConfig {
  BaseConfig base;
  FibreConfig fibre;
  std::optional<FlowConfig> flow;
  std::optional<double> beta;
  std::vector<double> beta_grid;
  SampleConfig samples;
  std::size_t depth = 10'000;
  std::size_t n_max = 1'000'000;
  std::optional<double> tol;  // default depends on the base
  std::size_t threads = 0;
  std::string out = ".";
  std::string format = "csv";
  std::size_t lyap_steps = 100'000;
  std::vector<double> theta0;
  std::string restrict_to;           // "", "M1", "M2"
  std::string estimator = "beta_c";  // beta_c | beta_hat
  std::optional<double> offset;      // oracle; defaults to 2 gamma
  double tol_pinch = 1e-3;
  double tol_collapse = 1e-9;
  double escape_margin = 0.5;
};

/// Throws ConfigError on unknown kinds, missing fields or out-of-range values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// The fully resolved configuration (defaults filled in); parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

/// Range checks shared by every subcommand. Throws ConfigError.
void validate(const RunConfig& config);

BaseSystem make_base(const RunConfig& config);
FibreFamily make_family(const RunConfig& config);
flow::ScalarFlowSystem make_flow(const RunConfig& config);

/// Base samples: the orbit points for periodic bases; otherwise a uniform grid
/// (i / n, or an n^(1/2) x n^(1/2) grid on the 2-torus) or a randomly shifted Halton set.
std::vector<BasePoint> make_samples(const RunConfig& config);

double resolved_tol(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace skewsn
