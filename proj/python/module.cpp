// Bindings for the simulation front end. Configurations cross the boundary as JSON text;
// the Python package wraps them as dicts.

#include "hypbc/errors.hpp"
#include "hypbc/rk.hpp"
#include "hypbc/sim.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

namespace py = pybind11;
using namespace hypbc;

namespace {

py::object maybe(double v) { return std::isfinite(v) ? py::object(py::float_(v)) : py::object(py::none()); }

py::dict boundary_columns(const std::vector<sw::EndSample>& samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  Vec t(n), h(n), u(n), phi(n), speed(n), position(n), residual(n);
  Eigen::VectorXi side(n), mode(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const sw::EndSample& s = samples[static_cast<std::size_t>(i)];
    t(i) = s.t;
    side(i) = s.side == Side::Right ? 1 : 0;
    h(i) = s.h;
    u(i) = s.u;
    phi(i) = s.phi;
    speed(i) = s.speed;
    position(i) = s.position;
    mode(i) = s.mode;
    residual(i) = s.residual;
  }
  py::dict d;
  d["t"] = t;
  d["right"] = side;
  d["h"] = h;
  d["u"] = u;
  d["phi"] = phi;
  d["speed"] = speed;
  d["position"] = position;
  d["mode"] = mode;
  d["residual"] = residual;
  return d;
}

py::dict outcome_to_dict(const sim::RunOutcome& o) {
  py::dict d;
  d["config"] = sim::to_json(o.config);
  py::dict metrics;
  for (const sim::Metric& m : o.metrics) metrics[py::str(m.name)] = maybe(m.value);
  d["metrics"] = metrics;
  d["failed"] = o.failed;
  d["failure"] = o.failure;
  d["failure_time"] = o.failure_time ? py::object(py::float_(*o.failure_time)) : py::object(py::none());
  d["warnings"] = o.warnings;
  if (o.testbed) {
    py::dict tb;
    tb["problem"] = to_string(o.testbed->kind);
    tb["order"] = o.testbed->order;
    tb["policy"] = to_string(o.testbed->policy);
    tb["steps"] = o.testbed->steps;
    tb["err_differential"] = o.testbed->err_differential;
    tb["err_algebraic"] = o.testbed->err_algebraic;
    d["testbed"] = tb;
    return d;
  }
  py::list snaps;
  for (const sw::Snapshot& s : o.result.snapshots) {
    py::dict sd;
    sd["t"] = s.t;
    sd["x_left"] = s.x_left;
    sd["x_right"] = s.x_right;
    sd["cells"] = s.cells;
    sd["left"] = s.left;
    sd["right"] = s.right;
    snaps.append(sd);
  }
  d["snapshots"] = snaps;
  d["boundary"] = boundary_columns(o.result.boundary);
  py::list events;
  for (const sw::EventRecord& e : o.result.events)
    events.append(py::make_tuple(e.t, e.side == Side::Right ? "right" : "left", e.from, e.to));
  d["events"] = events;
  d["volume"] = o.result.volume;
  d["tracer"] = o.result.tracer;
  d["steps"] = o.result.steps;
  d["rejected"] = o.result.rejected;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compiled core of hypbc";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.attr("CONFIG_VERSION") = sim::kConfigVersion;

  m.def("parse_config", [](const std::string& text) {
    const sim::ParsedConfig p = sim::parse_config(text);
    return py::make_tuple(sim::to_json(p.config), p.warnings);
  }, py::arg("text"), "Validates a JSON configuration; returns (normalised JSON, warnings).");

  m.def("run", [](const std::string& text) {
    const sim::ParsedConfig p = sim::parse_config(text);
    sim::RunOutcome o;
    {
      py::gil_scoped_release release;
      o = sim::run(p.config);
    }
    o.warnings.insert(o.warnings.begin(), p.warnings.begin(), p.warnings.end());
    return outcome_to_dict(o);
  }, py::arg("text"), "Runs one configuration; solver failures are reported, not raised.");

  m.def("sweep", [](const std::string& text, std::vector<int> ladder, int threads) {
    const sim::RunConfig c = sim::parse_config(text).config;
    py::gil_scoped_release release;
    return sim::report_json(sim::sweep(c, std::move(ladder), threads));
  }, py::arg("text"), py::arg("ladder") = std::vector<int>{}, py::arg("threads") = 0,
     "Runs a resolution ladder; returns the report as JSON text.");

  m.def("render_report", &sim::render_report, py::arg("report_json"));
  m.def("problem_ids", &sim::problem_ids);
  m.def("metric_names", &sim::metric_names, py::arg("problem"));

  m.def("dambreak_exact", [](double x, double t) {
    const sw::Primitive p = sw::dambreak_exact(x, t);
    return py::make_tuple(p.h, maybe(p.u));
  }, py::arg("x"), py::arg("t"));

  m.def("f_tilde", [](double k, int s, double a, double b, double c, int order) {
    return f_tilde(k, s, a, b, c, RkScheme::of_order(order));
  }, py::arg("k"), py::arg("s"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("order"));

  m.def("check_forcing_bound", &check_forcing_bound, py::arg("forcing"), py::arg("c_max") = 0.125,
        py::arg("gamma_end") = 1.0);
}
