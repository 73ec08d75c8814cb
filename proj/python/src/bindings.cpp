#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "convexify/error.hpp"
#include "convexify/pipeline.hpp"
#include "convexify/verify.hpp"

namespace py = pybind11;
using namespace convexify;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

RunConfig config_from(const std::string& text, const py::dict& overrides) {
    RunConfig cfg = parse_config(text);
    for (const auto& [k, v] : overrides) set_config_value(cfg, py::str(k), py::str(v));
    cfg.finalize();
    return cfg;
}

/// Problem and functional built once from a config, for repeated J / gradient calls.
struct Session {
    RunConfig cfg;
    SyntheticProblem problem;
    Functional J;
    std::vector<double> lift;

    explicit Session(RunConfig c)
        : cfg(std::move(c)),
          problem(make_problem(cfg)),
          J(problem.grid, problem.coeffs, cfg.carleman, cfg.tikhonov),
          lift(build_boundary_lift(derive_transformed_traces(problem.traces, cfg.smoothing), problem.grid,
                                   cfg.lift_cutoff)) {}
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Carleman-weighted convexification for a parabolic coefficient inverse problem";

    py::register_exception<Error>(m, "ConvexifyError", PyExc_RuntimeError);

    py::class_<RunConfig>(m, "Config")
        .def(py::init(&config_from), py::arg("text") = "", py::arg("overrides") = py::dict())
        .def("set", [](RunConfig& c, const std::string& k, const std::string& v) {
            set_config_value(c, k, v);
            c.finalize();
        })
        .def("canonical", &RunConfig::canonical)
        .def("hash", [](const RunConfig& c) { return hex64(c.hash()); })
        .def_static("keys", &config_keys)
        .def("__repr__", [](const RunConfig& c) { return "<Config " + hex64(c.hash()) + ">"; });

    m.def("load_config", [](const std::string& path) {
        RunConfig c = load_config(path);
        c.finalize();
        return c;
    });

    m.def(
        "forward",
        [](const RunConfig& cfg) {
            const SyntheticProblem p = make_problem(cfg);
            py::dict out;
            const int t_axis = p.traces.face.dims() - 1;
            std::vector<double> t(p.traces.face.size());
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = p.traces.face.coordinate(i, t_axis);
            out["t"] = to_array(t);
            out["g1"] = to_array(p.traces.g1);
            out["g2"] = to_array(p.traces.g2);
            std::vector<double> x1(p.grid.space_size());
            for (std::size_t s = 0; s < x1.size(); ++s) x1[s] = p.grid.space().coordinate(s, 0);
            out["x1"] = to_array(x1);
            out["c_true"] = to_array(p.coeffs.c_true);
            out["f"] = to_array(p.coeffs.f);
            out["grid_hash"] = hex64(p.grid.hash());
            return out;
        },
        py::arg("config"), "Synthetic lateral Cauchy data and the true coefficient.");

    m.def(
        "invert",
        [](const RunConfig& cfg) {
            const SyntheticProblem p = make_problem(cfg);
            InversionOutcome o;
            {
                py::gil_scoped_release release;
                o = run_inversion(cfg, p);
            }
            const InversionRun& best = o.runs[o.best];
            py::dict out;
            out["report"] = inversion_report(cfg, p, o).dump();
            out["c_rec"] = to_array(best.recovered.c);
            out["c_true"] = to_array(p.coeffs.c_true);
            std::vector<double> J;
            for (const auto& h : best.result.history) J.push_back(h.J);
            out["history_J"] = to_array(J);
            return out;
        },
        py::arg("config"), "Recover c from the generated data; the report is a JSON string.");

    m.def(
        "verify",
        [](const RunConfig& cfg) {
            py::gil_scoped_release release;
            return run_verify_suite(cfg).dump();
        },
        py::arg("config"), "Run the verification suite; returns a JSON string.");

    m.def(
        "sweep",
        [](const RunConfig& cfg) {
            const SyntheticProblem p = make_problem(cfg);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_sweep(cfg, p);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["lambda"] = r.lambda;
                d["final_J"] = r.final_J;
                d["rel_L2_c"] = r.rel_L2_c;
                d["iters"] = r.iters;
                d["status"] = r.status;
                out.append(d);
            }
            return out;
        },
        py::arg("config"));

    py::class_<Session>(m, "Session", "Problem, lift and functional for one config.")
        .def(py::init([](const RunConfig& c) { return std::make_unique<Session>(c); }), py::arg("config"))
        .def_property_readonly("size", [](const Session& s) { return s.problem.grid.size(); })
        .def_property_readonly("shape",
                               [](const Session& s) {
                                   const BoxGrid& b = s.problem.grid.spacetime();
                                   std::vector<int> shape;
                                   for (int k = b.dims() - 1; k >= 0; --k) shape.push_back(b.axis(k).count);
                                   return shape;
                               })
        .def_property_readonly("w_true", [](const Session& s) { return to_array(s.problem.w_true); })
        .def_property_readonly("lift", [](const Session& s) { return to_array(s.lift); })
        .def("J", [](const Session& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& w) {
            const auto v = from_array(w);
            require_size(v, s.problem.grid.size(), "w");
            return s.J.evaluate(v);
        })
        .def("gradient",
             [](const Session& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& w) {
                 const auto v = from_array(w);
                 require_size(v, s.problem.grid.size(), "w");
                 return to_array(s.J.gradient(v));
             })
        .def("h4_norm",
             [](const Session& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& w) {
                 const auto v = from_array(w);
                 require_size(v, s.problem.grid.size(), "w");
                 return s.J.h4().norm(v);
             })
        .def("recover", [](const Session& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& w) {
            const auto v = from_array(w);
            require_size(v, s.problem.grid.size(), "w");
            return to_array(recover_coefficient(v, s.problem.coeffs, s.problem.grid).c);
        });
}
