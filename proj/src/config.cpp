#include "skewsn/config.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace skewsn {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

// Counts must be non-negative integers; nlohmann would otherwise wrap -3 into a huge size_t.
template <>
std::size_t get_or<std::size_t>(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
  throw ConfigError(std::string("config field '") + key + "' must be a non-negative integer");
}

Interval parse_interval(const json& j, const char* key, Interval fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string("config field '") + key + "' must be [lo, hi]");
  }
  return Interval{v[0].get<double>(), v[1].get<double>()};
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

BaseConfig parse_base(const json& j) {
  BaseConfig b;
  b.kind = get_or<std::string>(j, "kind", b.kind);
  if (b.kind != "rotation" && b.kind != "torus" && b.kind != "identity" && b.kind != "periodic") {
    throw ConfigError("unknown base kind '" + b.kind + "'");
  }
  if (j.contains("rho") && !j.at("rho").is_null()) {
    if (j.at("rho").is_string()) {
      if (j.at("rho").get<std::string>() != "golden") {
        throw ConfigError("base.rho must be a number or \"golden\"");
      }
    } else {
      b.rho = get_or<double>(j, "rho", 0.0);
    }
  }
  b.dim = get_or<int>(j, "dim", b.kind == "torus" ? 2 : 1);
  if (j.contains("points")) {
    b.points = get_or<std::vector<std::vector<double>>>(j, "points", {});
  }
  return b;
}

FibreConfig parse_fibre(const json& j) {
  FibreConfig f;
  f.kind = get_or<std::string>(j, "kind", f.kind);
  if (f.kind != "arctan1d" && f.kind != "arctan2d") {
    throw ConfigError("unknown fibre kind '" + f.kind + "'");
  }
  f.alpha = get_or<double>(j, "alpha", f.alpha);
  f.gamma = get_or<double>(j, "gamma", f.gamma);
  f.bounds = parse_interval(j, "Gamma", f.bounds);
  f.mirrored = get_or<bool>(j, "mirrored", f.mirrored);
  return f;
}

FlowConfig parse_flow(const json& j) {
  FlowConfig f;
  f.t0 = get_or<double>(j, "t0", f.t0);
  f.rho_flow = get_or<double>(j, "rho_flow", f.rho_flow);
  f.field = get_or<std::string>(j, "field", f.field);
  if (f.field != "linear" && f.field != "quadratic_cap") {
    throw ConfigError("unknown flow field '" + f.field + "'");
  }
  if (j.contains("params")) f.params = get_or<std::map<std::string, double>>(j, "params", {});
  return f;
}

std::vector<double> parse_grid(const json& j) {
  if (j.is_array()) {
    try {
      return j.get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("beta_grid: ") + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("beta_grid must be a list or {start, stop, count}");
  const double start = get_or<double>(j, "start", 0.0);
  const double stop = get_or<double>(j, "stop", 0.0);
  const auto count = get_or<std::size_t>(j, "count", 0);
  if (count < 1) throw ConfigError("beta_grid.count must be at least 1");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = count == 1 ? start
                         : start + (stop - start) * static_cast<double>(i) /
                                       static_cast<double>(count - 1);
  }
  return grid;
}

double param(const FlowConfig& f, const std::string& key, double fallback) {
  const auto it = f.params.find(key);
  return it == f.params.end() ? fallback : it->second;
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  if (j.contains("base")) c.base = parse_base(j.at("base"));
  if (j.contains("fibre")) c.fibre = parse_fibre(j.at("fibre"));
  if (j.contains("flow") && !j.at("flow").is_null()) c.flow = parse_flow(j.at("flow"));
  if (j.contains("beta") && !j.at("beta").is_null()) c.beta = get_or<double>(j, "beta", 0.0);
  if (j.contains("beta_grid")) c.beta_grid = parse_grid(j.at("beta_grid"));
  if (j.contains("samples")) {
    const auto& s = j.at("samples");
    if (s.is_number_integer()) {
      c.samples.count = get_or<std::size_t>(j, "samples", 0);
    } else if (s.is_object()) {
      c.samples.count = get_or<std::size_t>(s, "count", c.samples.count);
      c.samples.placement = get_or<std::string>(s, "placement", c.samples.placement);
      c.samples.seed = get_or<std::uint64_t>(s, "seed", c.samples.seed);
    } else {
      throw ConfigError("samples must be an integer or {count, placement, seed}");
    }
  }
  c.depth = get_or<std::size_t>(j, "depth", c.depth);
  c.n_max = get_or<std::size_t>(j, "n_max", c.n_max);
  if (j.contains("tol") && !j.at("tol").is_null()) c.tol = get_or<double>(j, "tol", 0.0);
  c.threads = get_or<std::size_t>(j, "threads", c.threads);
  c.out = get_or<std::string>(j, "out", c.out);
  c.format = get_or<std::string>(j, "format", c.format);
  c.lyap_steps = get_or<std::size_t>(j, "lyap_steps", c.lyap_steps);
  c.theta0 = get_or<std::vector<double>>(j, "theta0", c.theta0);
  c.restrict_to = get_or<std::string>(j, "restrict", c.restrict_to);
  c.estimator = get_or<std::string>(j, "estimator", c.estimator);
  if (j.contains("offset") && !j.at("offset").is_null()) c.offset = get_or<double>(j, "offset", 0.0);
  c.tol_pinch = get_or<double>(j, "tol_pinch", c.tol_pinch);
  c.tol_collapse = get_or<double>(j, "tol_collapse", c.tol_collapse);
  c.escape_margin = get_or<double>(j, "escape_margin", c.escape_margin);
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["base"] = {{"kind", c.base.kind}, {"dim", c.base.dim}};
  if (c.base.rho) {
    j["base"]["rho"] = *c.base.rho;
  } else if (c.base.kind == "rotation") {
    j["base"]["rho"] = golden_mean();
  } else {
    j["base"]["rho"] = nullptr;
  }
  if (!c.base.points.empty()) j["base"]["points"] = c.base.points;
  j["fibre"] = {{"kind", c.fibre.kind},
                {"alpha", c.fibre.alpha},
                {"gamma", c.fibre.gamma},
                {"Gamma", {c.fibre.bounds.lo, c.fibre.bounds.hi}},
                {"mirrored", c.fibre.mirrored}};
  if (c.flow) {
    j["flow"] = {{"t0", c.flow->t0},
                 {"rho_flow", c.flow->rho_flow},
                 {"field", c.flow->field},
                 {"params", c.flow->params}};
  } else {
    j["flow"] = nullptr;
  }
  j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
  j["beta_grid"] = c.beta_grid;
  j["samples"] = {
      {"count", c.samples.count}, {"placement", c.samples.placement}, {"seed", c.samples.seed}};
  j["depth"] = c.depth;
  j["n_max"] = c.n_max;
  j["tol"] = c.tol ? json(*c.tol) : json(nullptr);
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["format"] = c.format;
  j["lyap_steps"] = c.lyap_steps;
  j["theta0"] = c.theta0;
  j["restrict"] = c.restrict_to;
  j["estimator"] = c.estimator;
  j["offset"] = c.offset ? json(*c.offset) : json(nullptr);
  j["tol_pinch"] = c.tol_pinch;
  j["tol_collapse"] = c.tol_collapse;
  j["escape_margin"] = c.escape_margin;
  return j;
}

void validate(const RunConfig& c) {
  if (c.base.kind == "periodic") {
    if (c.base.points.empty()) throw ConfigError("periodic base needs base.points");
    for (const auto& p : c.base.points) {
      if (p.size() != 1 && p.size() != 2) throw ConfigError("base.points entries need 1 or 2 coords");
    }
  }
  if (c.base.kind == "identity" && c.base.dim != 1 && c.base.dim != 2) {
    throw ConfigError("identity base dim must be 1 or 2");
  }
  if (!(c.fibre.alpha > 0.0)) throw ConfigError("fibre.alpha must be positive");
  if (!(c.fibre.bounds.lo < c.fibre.bounds.hi)) throw ConfigError("fibre.Gamma must satisfy lo < hi");
  if (c.samples.count == 0) throw ConfigError("samples must be positive");
  if (c.samples.placement != "grid" && c.samples.placement != "halton") {
    throw ConfigError("samples.placement must be grid or halton");
  }
  if (c.depth == 0) throw ConfigError("depth must be positive");
  if (c.n_max == 0) throw ConfigError("n_max must be positive");
  if (c.tol && !(*c.tol > 0.0)) throw ConfigError("tol must be positive");
  if (c.lyap_steps == 0) throw ConfigError("lyap_steps must be positive");
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  if (c.restrict_to != "" && c.restrict_to != "M1" && c.restrict_to != "M2") {
    throw ConfigError("restrict must be M1 or M2");
  }
  if (c.estimator != "beta_c" && c.estimator != "beta_hat") {
    throw ConfigError("estimator must be beta_c or beta_hat");
  }
  if (!(c.escape_margin >= 0.0)) throw ConfigError("escape_margin must be non-negative");
  if (c.flow && !(c.flow->t0 > 0.0)) throw ConfigError("flow.t0 must be positive");
  if (!std::is_sorted(c.beta_grid.begin(), c.beta_grid.end())) {
    throw ConfigError("beta_grid must be ascending");
  }
}

BaseSystem make_base(const RunConfig& c) {
  if (c.flow) return make_flow(c).time_t0_base();
  const auto& b = c.base;
  if (b.kind == "rotation") return BaseSystem::rotation(b.rho.value_or(golden_mean()));
  if (b.kind == "torus") return BaseSystem::torus_map();
  if (b.kind == "identity") return BaseSystem::identity(b.dim);
  std::vector<BasePoint> pts;
  for (const auto& p : b.points) {
    pts.push_back(p.size() == 1 ? BasePoint(p[0]) : BasePoint(p[0], p[1]));
  }
  return BaseSystem::periodic_orbit(std::move(pts));
}

flow::ScalarFlowSystem make_flow(const RunConfig& c) {
  if (!c.flow) throw ConfigError("no flow section in config");
  const FlowConfig& f = *c.flow;
  if (f.field == "linear") {
    return flow::linear_field(param(f, "a", -1.0), param(f, "b", 0.0), param(f, "k", 1.0), f.t0,
                              f.rho_flow, Interval{param(f, "lo", -2.0), param(f, "hi", 2.0)});
  }
  return flow::quadratic_cap_field(param(f, "c0", 0.5), param(f, "c1", 0.2), f.t0, f.rho_flow,
                                   Interval{param(f, "lo", 0.0), param(f, "hi", 2.0)});
}

FibreFamily make_family(const RunConfig& c) {
  if (c.flow) {
    return flow::as_fibre_family(make_flow(c));
  }
  try {
    FibreFamily fam = c.fibre.kind == "arctan1d"
                          ? FibreFamily::arctan_1d(c.fibre.alpha, c.fibre.gamma, c.fibre.bounds)
                          : FibreFamily::arctan_2d(c.fibre.alpha, c.fibre.gamma, c.fibre.bounds);
    return c.fibre.mirrored ? fam.mirrored() : fam;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<BasePoint> make_samples(const RunConfig& c) {
  const BaseSystem base = make_base(c);
  if (base.kind() == BaseSystem::Kind::PeriodicOrbit) return base.points();
  const int dim = base.dimension();
  const std::size_t n = c.samples.count;
  std::vector<BasePoint> out;
  if (c.samples.placement == "grid") {
    if (dim == 1) {
      out.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(static_cast<double>(i) / static_cast<double>(n));
      }
    } else {
      const auto side = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n)))));
      out.reserve(side * side);
      for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t k = 0; k < side; ++k) {
          out.emplace_back(static_cast<double>(i) / static_cast<double>(side),
                           static_cast<double>(k) / static_cast<double>(side));
        }
      }
    }
    return out;
  }
  std::mt19937_64 rng(c.samples.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s1 = unit(rng);
  const double s2 = unit(rng);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h1 = wrap_unit(radical_inverse(i + 1, 2) + s1);
    if (dim == 1) {
      out.emplace_back(h1);
    } else {
      out.emplace_back(h1, wrap_unit(radical_inverse(i + 1, 3) + s2));
    }
  }
  return out;
}

double resolved_tol(const RunConfig& c) {
  if (c.tol) return *c.tol;
  const BaseSystem base = make_base(c);
  return base.kind() == BaseSystem::Kind::PeriodicOrbit || !c.restrict_to.empty() ? 1e-6 : 1e-4;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

}  // namespace skewsn
