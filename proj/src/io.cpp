#include "skewsn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skewsn::io {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void theta_header(std::ostream& os, int dim) { os << (dim == 2 ? "theta1,theta2" : "theta1"); }

void theta_cells(std::ostream& os, const BasePoint& p) {
  os << fmt(p[0]);
  if (p.dim == 2) os << ',' << fmt(p[1]);
}

int dim_of(const std::vector<BasePoint>& samples) {
  return samples.empty() ? 1 : samples.front().dim;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void write_graph_csv(std::ostream& os, const GraphField& field) {
  theta_header(os, dim_of(field.samples));
  os << ",value,escaped\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    theta_cells(os, field.samples[i]);
    const auto& v = field.values[i];
    os << ',' << (v ? fmt(*v) : "") << ',' << (v ? 0 : 1) << '\n';
  }
}

void write_interval_csv(std::ostream& os, const IntervalField& field) {
  theta_header(os, dim_of(field.samples));
  os << ",lo,hi,empty\n";
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    theta_cells(os, field.samples[i]);
    const auto& iv = field.intervals[i];
    if (iv) {
      os << ',' << fmt(iv->lo) << ',' << fmt(iv->hi) << ",0\n";
    } else {
      os << ",,,1\n";
    }
  }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "beta,min_gap,lambda_upper,lambda_lower,fraction_bounded\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rows) {
    os << fmt(r.beta) << ',' << cell(r.min_gap) << ',' << cell(r.lambda_upper) << ','
       << cell(r.lambda_lower) << ',' << fmt(r.fraction_bounded) << '\n';
  }
}

json to_json(const BasePoint& p) {
  if (p.dim == 2) return json::array({p[0], p[1]});
  return json::array({p[0]});
}

json to_json(const GraphField& f) {
  json vals = json::array();
  json thetas = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    thetas.push_back(to_json(f.samples[i]));
    vals.push_back(opt(f.values[i]));
  }
  return {{"which", to_string(f.which)}, {"beta", f.beta},     {"depth", f.depth},
          {"theta", thetas},             {"value", vals},      {"escaped", f.escaped_count()}};
}

json to_json(const IntervalField& f) {
  json thetas = json::array();
  json lo = json::array();
  json hi = json::array();
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    thetas.push_back(to_json(f.samples[i]));
    lo.push_back(f.intervals[i] ? json(f.intervals[i]->lo) : json(nullptr));
    hi.push_back(f.intervals[i] ? json(f.intervals[i]->hi) : json(nullptr));
  }
  return {{"beta", f.beta}, {"depth", f.depth}, {"theta", thetas},
          {"lo", lo},       {"hi", hi},         {"fraction_bounded", f.fraction_bounded()}};
}

json to_json(const PinchingReport& r) {
  json frac = json::array();
  for (const auto& [delta, share] : r.fraction_below) {
    frac.push_back({{"delta", delta}, {"fraction", share}});
  }
  return {{"min_gap", r.min_gap},
          {"argmin", to_json(r.argmin)},
          {"classification", to_string(r.classification)},
          {"delta", r.delta},
          {"median_gap", r.median_gap},
          {"max_gap", r.max_gap},
          {"n_samples", r.n_samples},
          {"n_compared", r.n_compared},
          {"depth", r.depth},
          {"beta", r.beta},
          {"tol_pinch", r.thresholds.tol_pinch},
          {"tol_collapse", r.thresholds.tol_collapse},
          {"fraction_below", frac}};
}

json to_json(const BifurcationResult& r) {
  return {{"beta_c", r.beta_c},
          {"bracket", {r.bracket.lo, r.bracket.hi}},
          {"tol", r.tol},
          {"existence_depth", r.existence_depth},
          {"restricted_to", r.restricted_to ? json(*r.restricted_to) : json(nullptr)},
          {"method", to_string(r.method)},
          {"samples", r.samples},
          {"n_max", r.n_max},
          {"evaluations", r.evaluations}};
}

json to_json(std::span<const SweepRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"beta", r.beta},
                   {"min_gap", opt(r.min_gap)},
                   {"lambda_upper", opt(r.lambda_upper)},
                   {"lambda_lower", opt(r.lambda_lower)},
                   {"fraction_bounded", r.fraction_bounded}});
  }
  return out;
}

namespace {

void dump_into(std::ostringstream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        os << fmt(v);
      } else {
        os << "null";
      }
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << json(it.key()).dump() << ": ";
        dump_into(os, it.value(), indent + 1);
      }
      os << '\n' << pad << '}';
      break;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      bool scalar = true;
      for (const auto& e : j) scalar = scalar && !e.is_structured();
      if (scalar) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          dump_into(os, j[i], indent + 1);
        }
        os << ']';
        break;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        dump_into(os, j[i], indent + 1);
      }
      os << '\n' << pad << ']';
      break;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump(const json& j) {
  std::ostringstream os;
  dump_into(os, j, 0);
  os << '\n';
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace skewsn::io
