#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewsn/bifurcation.hpp"
#include "skewsn/config.hpp"
#include "skewsn/flow_adapter.hpp"
#include "skewsn/graph_engine.hpp"
#include "skewsn/io.hpp"
#include "skewsn/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skewsn;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kPrecondition = 3;
constexpr int kNumerical = 4;

struct Flags {
  std::string config;
  std::optional<double> beta;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> depth;
  std::optional<double> tol;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> offset;
  std::optional<std::size_t> lyap_steps;
  std::optional<std::string> restrict_to;
  std::optional<std::string> estimator;
  std::vector<double> beta_grid;  // start stop count
  std::vector<double> theta0;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--beta", f.beta, "parameter value");
  sub->add_option("--samples", f.samples, "number of base samples");
  sub->add_option("--depth", f.depth, "pullback depth");
  sub->add_option("--tol", f.tol, "bisection tolerance");
  sub->add_option("--threads", f.threads, "worker threads (0: all cores)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--alpha", f.alpha, "fibre steepness");
  sub->add_option("--gamma", f.gamma, "forcing amplitude");
  sub->add_option("--offset", f.offset, "oracle offset (default 2 gamma)");
  sub->add_option("--lyap-steps", f.lyap_steps, "Birkhoff average length");
  sub->add_option("--restrict", f.restrict_to, "M1 or M2 (torus base)");
  sub->add_option("--estimator", f.estimator, "beta_c or beta_hat");
  sub->add_option("--beta-grid", f.beta_grid, "start stop count")->expected(3);
  sub->add_option("--theta0", f.theta0, "Lyapunov start point")->expected(1, 2);
}

RunConfig resolve(const Flags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot open config file '" + f.config + "'");
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + f.config + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }
  if (f.beta) j["beta"] = *f.beta;
  if (f.samples) {
    if (j.contains("samples") && j["samples"].is_object()) {
      j["samples"]["count"] = *f.samples;
    } else {
      j["samples"] = *f.samples;
    }
  }
  if (f.depth) j["depth"] = *f.depth;
  if (f.tol) j["tol"] = *f.tol;
  if (f.threads) j["threads"] = *f.threads;
  if (f.out) j["out"] = *f.out;
  if (f.format) j["format"] = *f.format;
  if (f.alpha) j["fibre"]["alpha"] = *f.alpha;
  if (f.gamma) j["fibre"]["gamma"] = *f.gamma;
  if (f.offset) j["offset"] = *f.offset;
  if (f.lyap_steps) j["lyap_steps"] = *f.lyap_steps;
  if (f.restrict_to) j["restrict"] = *f.restrict_to;
  if (f.estimator) j["estimator"] = *f.estimator;
  if (!f.beta_grid.empty()) {
    j["beta_grid"] = {{"start", f.beta_grid[0]},
                      {"stop", f.beta_grid[1]},
                      {"count", static_cast<long long>(std::llround(f.beta_grid[2]))}};
  }
  if (!f.theta0.empty()) j["theta0"] = f.theta0;
  return parse_config(j);
}

// Output directory must exist (created if needed) and accept files before any compute starts.
void check_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  const fs::path probe = fs::path(c.out) / ".skewsn_write_probe";
  std::ofstream test(probe);
  if (!test) throw ConfigError("output directory '" + c.out + "' is not writable");
  test.close();
  fs::remove(probe, ec);
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

double require_beta(const RunConfig& c) {
  if (!c.beta) throw ConfigError("this command needs a beta (--beta or config 'beta')");
  return *c.beta;
}

EngineOptions engine(const RunConfig& c) { return EngineOptions{c.escape_margin, c.threads}; }

json with_config(json j, const RunConfig& c) {
  j["config"] = to_json(c);
  return j;
}

// Graph values where either side escaped are dropped from both so the gap is well defined.
void mask_jointly(GraphField& a, GraphField& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.values[i] || !b.values[i]) {
      a.values[i].reset();
      b.values[i].reset();
    }
  }
}

int cmd_graphs(const RunConfig& c) {
  const double beta = require_beta(c);
  const BaseSystem base = make_base(c);
  const FibreFamily fam = make_family(c);
  const auto samples = make_samples(c);
  GraphField lower = compute_graph_field(base, fam, beta, samples, c.depth, GraphSide::Lower, engine(c));
  GraphField upper = compute_graph_field(base, fam, beta, samples, c.depth, GraphSide::Upper, engine(c));

  const bool json_out = c.format == "json";
  const std::string ext = json_out ? ".json" : ".csv";
  for (const auto* f : {&lower, &upper}) {
    const std::string name = (f->which == GraphSide::Lower ? "lower" : "upper") + ext;
    if (json_out) {
      io::write_file(out_path(c, name), io::dump(with_config(io::to_json(*f), c)));
    } else {
      std::ostringstream os;
      io::write_graph_csv(os, *f);
      io::write_file(out_path(c, name), os.str());
    }
    if (f->any_escaped()) {
      std::cerr << "warning: " << f->escaped_count() << " of " << f->size() << " samples of the "
                << to_string(f->which) << " graph escaped at beta=" << io::fmt(beta) << "\n";
    }
  }

  GraphField ml = lower;
  GraphField mu = upper;
  mask_jointly(ml, mu);
  json report;
  if (ml.all_escaped()) {
    report = {{"min_gap", nullptr},       {"argmin", nullptr},         {"classification", nullptr},
              {"n_samples", ml.size()},   {"n_compared", 0},           {"depth", c.depth},
              {"beta", beta},             {"note", "every sample escaped"}};
  } else {
    report = io::to_json(pinching_report(ml, mu, PinchingThresholds{c.tol_pinch, c.tol_collapse}));
  }
  io::write_file(out_path(c, "pinching.json"), io::dump(with_config(report, c)));
  std::cout << out_path(c, "lower" + ext) << "\n"
            << out_path(c, "upper" + ext) << "\n"
            << out_path(c, "pinching.json") << "\n";
  return kOk;
}

BifurcationOptions bif_options(const RunConfig& c) {
  BifurcationOptions o;
  o.tol = resolved_tol(c);
  o.existence.schedule.max_depth = c.n_max;
  o.existence.engine = engine(c);
  return o;
}

int cmd_betac(const RunConfig& c) {
  const BaseSystem base = make_base(c);
  const FibreFamily fam = make_family(c);
  const BifurcationOptions o = bif_options(c);
  BifurcationResult r;
  if (!c.restrict_to.empty()) {
    if (base.kind() != BaseSystem::Kind::TorusMap) {
      throw ConfigError("restrict needs the torus base");
    }
    InvariantSet set;
    set.label = c.restrict_to;
    set.points = c.restrict_to == "M1" ? torus_orbit_m1() : torus_orbit_m2();
    r = find_beta_c_restricted(base, fam, set, o);
  } else {
    const auto samples = make_samples(c);
    r = c.estimator == "beta_hat" ? find_beta_hat(base, fam, samples, o)
                                  : find_beta_c(base, fam, samples, o);
  }
  json j = io::to_json(r);
  j["estimator"] = c.estimator;
  const std::string text = io::dump(with_config(j, c));
  io::write_file(out_path(c, "betac.json"), text);
  std::cout << text;
  return kOk;
}

int cmd_sweep(const RunConfig& c) {
  if (c.beta_grid.empty()) throw ConfigError("sweep needs beta_grid (--beta-grid start stop count)");
  const BaseSystem base = make_base(c);
  const FibreFamily fam = make_family(c);
  const auto samples = make_samples(c);
  SweepOptions o;
  o.depth = c.depth;
  o.lyapunov_steps = c.lyap_steps;
  o.engine = engine(c);
  const auto rows = sweep(base, fam, c.beta_grid, samples, o);
  if (c.format == "json") {
    json j = {{"rows", io::to_json(rows)}};
    io::write_file(out_path(c, "sweep.json"), io::dump(with_config(j, c)));
    std::cout << out_path(c, "sweep.json") << "\n";
  } else {
    std::ostringstream os;
    io::write_sweep_csv(os, rows);
    io::write_file(out_path(c, "sweep.csv"), os.str());
    std::cout << out_path(c, "sweep.csv") << "\n";
  }
  return kOk;
}

BasePoint theta0_of(const RunConfig& c, int dim) {
  if (c.theta0.empty()) return dim == 2 ? BasePoint(0.0, 0.0) : BasePoint(0.0);
  if (static_cast<int>(c.theta0.size()) != dim) {
    throw ConfigError("theta0 must have as many coordinates as the base");
  }
  return dim == 2 ? BasePoint(c.theta0[0], c.theta0[1]) : BasePoint(c.theta0[0]);
}

int cmd_lyap(const RunConfig& c) {
  const double beta = require_beta(c);
  const BaseSystem base = make_base(c);
  const FibreFamily fam = make_family(c);
  const BasePoint theta0 = theta0_of(c, base.dimension());
  LyapunovOptions o;
  o.steps = c.lyap_steps;
  o.depth = c.depth;
  o.escape_margin = c.escape_margin;
  const double up = lyapunov(base, fam, beta, theta0, GraphSide::Upper, o);
  const double lo = lyapunov(base, fam, beta, theta0, GraphSide::Lower, o);
  json j = {{"beta", beta},       {"theta0", io::to_json(theta0)}, {"steps", o.steps},
            {"depth", o.depth},   {"lambda_upper", up},            {"lambda_lower", lo}};
  const std::string text = io::dump(with_config(j, c));
  io::write_file(out_path(c, "lyap.json"), text);
  std::cout << text;
  return kOk;
}

int cmd_oracle(const RunConfig& c) {
  const double alpha = c.fibre.alpha;
  const double offset = c.offset.value_or(2.0 * c.fibre.gamma);
  const double closed = oracle::closed_form_betac_arctan(alpha, offset);
  const auto sn = oracle::solve_saddle_node_1d(oracle::arctan_family(alpha, offset));
  json j = {{"alpha", alpha},
            {"offset", offset},
            {"beta_c_closed_form", closed},
            {"x_star_closed_form", oracle::arctan_tangency_point(alpha)},
            {"beta_c_newton", sn.beta_star},
            {"x_star_newton", sn.x_star},
            {"residual_fixed", sn.residual_fixed},
            {"residual_slope", sn.residual_slope}};
  if (!c.flow && c.base.kind == "identity") {
    const auto samples = make_samples(c);
    const auto id = oracle::identity_base_betac(make_family(c), samples);
    j["identity_base"] = {{"beta_c", id.beta_c},
                          {"beta_hat", id.beta_hat},
                          {"argmin", io::to_json(id.argmin)},
                          {"argmax", io::to_json(id.argmax)},
                          {"samples", samples.size()}};
  }
  const std::string text = io::dump(with_config(j, c));
  io::write_file(out_path(c, "oracle.json"), text);
  std::cout << text;
  return kOk;
}

int cmd_flowmap(const RunConfig& c) {
  const double beta = require_beta(c);
  const auto sys = make_flow(c);
  const FibreFamily fam = make_family(c);
  const auto thetas = make_samples(c);
  const Interval b = fam.bounds();
  constexpr int kX = 41;
  auto cell = [](double v) { return std::isfinite(v) ? io::fmt(v) : std::string(); };
  std::ostringstream csv;
  json rows = json::array();
  csv << "theta,x,value,deriv_x\n";
  for (const auto& th : thetas) {
    for (int i = 0; i < kX; ++i) {
      const double x = b.lo + b.width() * i / (kX - 1);
      const double v = fam.eval(beta, th, x);
      const double d = fam.deriv_x(beta, th, x);
      csv << io::fmt(th[0]) << ',' << io::fmt(x) << ',' << cell(v) << ',' << cell(d) << '\n';
      rows.push_back({th[0], x, std::isfinite(v) ? json(v) : json(nullptr),
                      std::isfinite(d) ? json(d) : json(nullptr)});
    }
  }
  const std::string name = c.format == "json" ? "flowmap.json" : "flowmap.csv";
  if (c.format == "json") {
    json j = {{"beta", beta},
              {"orientation", to_string(fam.orientation())},
              {"columns", {"theta", "x", "value", "deriv_x"}},
              {"rows", rows}};
    io::write_file(out_path(c, name), io::dump(with_config(j, c)));
  } else {
    io::write_file(out_path(c, name), csv.str());
  }
  std::cout << out_path(c, name) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skewsn: invariant graphs and saddle-node bifurcations of forced interval maps"};
  app.require_subcommand(1);
  Flags flags;
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Entry entries[] = {
      {"graphs", "lower/upper bounding graphs and pinching report", cmd_graphs},
      {"betac", "critical parameter by bisection", cmd_betac},
      {"sweep", "gap, Lyapunov exponents and bounded fraction over a beta grid", cmd_sweep},
      {"lyap", "Lyapunov exponents of both bounding graphs", cmd_lyap},
      {"oracle", "closed-form and 1D saddle-node reference values", cmd_oracle},
      {"flowmap", "samples of the time-t0 map of a scalar flow", cmd_flowmap},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_flags(sub, flags);
    subs.emplace_back(sub, &e);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  for (const auto& [sub, entry] : subs) {
    if (!sub->parsed()) continue;
    try {
      const RunConfig config = resolve(flags);
      check_out_dir(config);
      return entry->run(config);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    } catch (const PreconditionFailed& e) {
      std::cerr << "precondition failed: " << e.what() << "\n";
      return kPrecondition;
    } catch (const NotInvariant& e) {
      std::cerr << "precondition failed: " << e.what() << "\n";
      return kPrecondition;
    } catch (const GraphEscaped& e) {
      std::cerr << "precondition failed: " << e.what() << "\n";
      return kPrecondition;
    } catch (const oracle::DomainError& e) {
      std::cerr << "precondition failed: " << e.what() << "\n";
      return kPrecondition;
    } catch (const flow::ValidationFailed& e) {
      std::cerr << "precondition failed: " << e.what() << "\n";
      return kPrecondition;
    } catch (const std::exception& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return kNumerical;
    }
  }
  return kConfigError;
}
