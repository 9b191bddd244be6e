#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "skewsn/bifurcation.hpp"
#include "skewsn/flow_adapter.hpp"
#include "skewsn/graph_engine.hpp"
#include "skewsn/oracle.hpp"

namespace py = pybind11;
using namespace skewsn;

namespace {

std::vector<BasePoint> to_points(const std::vector<std::vector<double>>& raw) {
  std::vector<BasePoint> out;
  out.reserve(raw.size());
  for (const auto& p : raw) {
    if (p.size() == 1) {
      out.emplace_back(p[0]);
    } else if (p.size() == 2) {
      out.emplace_back(p[0], p[1]);
    } else {
      throw py::value_error("base points need 1 or 2 coordinates");
    }
  }
  return out;
}

std::vector<double> coords(const BasePoint& p) {
  return p.dim == 2 ? std::vector<double>{p[0], p[1]} : std::vector<double>{p[0]};
}

GraphSide side_of(const std::string& s) {
  if (s == "upper") return GraphSide::Upper;
  if (s == "lower") return GraphSide::Lower;
  throw py::value_error("side must be 'upper' or 'lower'");
}

py::dict result_dict(const BifurcationResult& r) {
  py::dict d;
  d["beta_c"] = r.beta_c;
  d["bracket"] = py::make_tuple(r.bracket.lo, r.bracket.hi);
  d["tol"] = r.tol;
  d["existence_depth"] = r.existence_depth;
  d["restricted_to"] = r.restricted_to;
  d["method"] = to_string(r.method);
  d["samples"] = r.samples;
  d["n_max"] = r.n_max;
  return d;
}

BifurcationOptions bif_options(double tol, double lo, double hi, std::size_t n_max,
                               std::size_t threads) {
  BifurcationOptions o;
  o.tol = tol;
  o.beta_range = Interval{lo, hi};
  o.existence.schedule.max_depth = n_max;
  o.existence.engine.threads = threads;
  return o;
}

}  // namespace

PYBIND11_MODULE(_skewsn, m) {
  m.doc() = "Invariant graphs and saddle-node bifurcations of forced monotone interval maps";

  py::register_exception<PreconditionFailed>(m, "PreconditionFailed", PyExc_RuntimeError);
  py::register_exception<NotInvariant>(m, "NotInvariant", PyExc_ValueError);
  py::register_exception<GraphEscaped>(m, "GraphEscaped", PyExc_RuntimeError);

  py::class_<BaseSystem>(m, "BaseSystem")
      .def_static("identity", &BaseSystem::identity, py::arg("dim") = 1)
      .def_static("rotation", &BaseSystem::rotation, py::arg("rho"))
      .def_static("golden_rotation", &BaseSystem::golden_rotation)
      .def_static("torus_map", &BaseSystem::torus_map)
      .def_static("periodic_orbit",
                  [](const std::vector<std::vector<double>>& pts) {
                    return BaseSystem::periodic_orbit(to_points(pts));
                  })
      .def_property_readonly("dimension", &BaseSystem::dimension)
      .def("forward",
           [](const BaseSystem& s, const std::vector<double>& p) {
             return coords(s.forward(to_points({p}).front()));
           })
      .def("backward",
           [](const BaseSystem& s, const std::vector<double>& p) {
             return coords(s.backward(to_points({p}).front()));
           })
      .def("describe", &BaseSystem::describe)
      .def("__repr__", &BaseSystem::describe);

  py::class_<FibreFamily>(m, "FibreFamily")
      .def_static("arctan_1d",
                  [](double alpha, double gamma) { return FibreFamily::arctan_1d(alpha, gamma); },
                  py::arg("alpha") = 100.0, py::arg("gamma") = 0.5)
      .def_static("arctan_2d",
                  [](double alpha, double gamma) { return FibreFamily::arctan_2d(alpha, gamma); },
                  py::arg("alpha") = 100.0, py::arg("gamma") = 0.5)
      .def("mirrored", &FibreFamily::mirrored)
      .def("eval",
           [](const FibreFamily& f, double beta, const std::vector<double>& theta, double x) {
             return f.eval(beta, to_points({theta}).front(), x);
           })
      .def_property_readonly("orientation",
                             [](const FibreFamily& f) { return to_string(f.orientation()); })
      .def("describe", &FibreFamily::describe)
      .def("__repr__", &FibreFamily::describe);

  m.def("golden_mean", &golden_mean);
  m.def("torus_orbit_m1", [] {
    std::vector<std::vector<double>> out;
    for (const auto& p : torus_orbit_m1()) out.push_back(coords(p));
    return out;
  });
  m.def("torus_orbit_m2", [] {
    std::vector<std::vector<double>> out;
    for (const auto& p : torus_orbit_m2()) out.push_back(coords(p));
    return out;
  });

  m.def(
      "graph",
      [](const BaseSystem& s, const FibreFamily& f, double beta,
         const std::vector<std::vector<double>>& samples, std::size_t depth,
         const std::string& side, std::size_t threads) {
        const auto pts = to_points(samples);
        EngineOptions o;
        o.threads = threads;
        py::gil_scoped_release release;
        return compute_graph_field(s, f, beta, pts, depth, side_of(side), o).values;
      },
      py::arg("base"), py::arg("family"), py::arg("beta"), py::arg("samples"),
      py::arg("depth") = 10000, py::arg("side") = "upper", py::arg("threads") = 0,
      "Bounding-graph values at the samples; None marks escape.");

  m.def(
      "pinching",
      [](const BaseSystem& s, const FibreFamily& f, double beta,
         const std::vector<std::vector<double>>& samples, std::size_t depth) {
        const auto pts = to_points(samples);
        const auto lo = compute_graph_field(s, f, beta, pts, depth, GraphSide::Lower);
        const auto up = compute_graph_field(s, f, beta, pts, depth, GraphSide::Upper);
        const auto r = pinching_report(lo, up);
        py::dict d;
        d["min_gap"] = r.min_gap;
        d["argmin"] = coords(r.argmin);
        d["classification"] = to_string(r.classification);
        d["median_gap"] = r.median_gap;
        d["n_samples"] = r.n_samples;
        d["depth"] = r.depth;
        return d;
      },
      py::arg("base"), py::arg("family"), py::arg("beta"), py::arg("samples"),
      py::arg("depth") = 10000);

  m.def(
      "find_beta_c",
      [](const BaseSystem& s, const FibreFamily& f, const std::vector<std::vector<double>>& samples,
         double tol, double lo, double hi, std::size_t n_max, std::size_t threads) {
        const auto pts = to_points(samples);
        const auto o = bif_options(tol, lo, hi, n_max, threads);
        BifurcationResult r;
        {
          py::gil_scoped_release release;
          r = find_beta_c(s, f, pts, o);
        }
        return result_dict(r);
      },
      py::arg("base"), py::arg("family"), py::arg("samples"), py::arg("tol") = 1e-4,
      py::arg("beta_lo") = 0.0, py::arg("beta_hi") = 1.0, py::arg("n_max") = 1000000,
      py::arg("threads") = 0);

  m.def(
      "find_beta_c_restricted",
      [](const BaseSystem& s, const FibreFamily& f, const std::vector<std::vector<double>>& points,
         const std::string& label, double tol) {
        InvariantSet set{label, to_points(points), false};
        return result_dict(find_beta_c_restricted(s, f, set, bif_options(tol, 0.0, 1.0, 1000000, 0)));
      },
      py::arg("base"), py::arg("family"), py::arg("points"), py::arg("label") = "",
      py::arg("tol") = 1e-6);

  m.def(
      "lyapunov",
      [](const BaseSystem& s, const FibreFamily& f, double beta, const std::vector<double>& theta0,
         const std::string& side, std::size_t steps, std::size_t depth) {
        LyapunovOptions o;
        o.steps = steps;
        o.depth = depth;
        const BasePoint t0 = to_points({theta0}).front();
        py::gil_scoped_release release;
        return lyapunov(s, f, beta, t0, side_of(side), o);
      },
      py::arg("base"), py::arg("family"), py::arg("beta"), py::arg("theta0"),
      py::arg("side") = "upper", py::arg("steps") = 100000, py::arg("depth") = 0);

  m.def("closed_form_betac", &oracle::closed_form_betac_arctan, py::arg("alpha"),
        py::arg("offset"));
  m.def(
      "saddle_node_arctan",
      [](double alpha, double offset) {
        const auto r = oracle::solve_saddle_node_1d(oracle::arctan_family(alpha, offset));
        return py::make_tuple(r.beta_star, r.x_star);
      },
      py::arg("alpha"), py::arg("offset"));

  m.def(
      "linear_flow_map",
      [](double a, double b, double k, double t0, double beta, double theta, double x) {
        const auto r = flow::time_t0_map(flow::linear_field(a, b, k, t0, 0.0), beta, theta, x);
        return py::make_tuple(r.x, r.deriv_x);
      },
      py::arg("a"), py::arg("b"), py::arg("k"), py::arg("t0"), py::arg("beta"), py::arg("theta"),
      py::arg("x"), "Time-t0 map of x' = a x + b sin(2 pi theta) - k beta and its x-derivative.");
}
