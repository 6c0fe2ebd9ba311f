#include "gllrss/error.hpp"
#include "gllrss/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gllrss;

namespace {

TransitionMatrix transition_from(const py::object& t, Eigen::Index n) {
  if (t.is_none()) return TransitionMatrix::identity(n);
  const auto arr = py::cast<py::array_t<double>>(t);
  if (arr.ndim() == 1) {
    Vector c = py::cast<Vector>(arr);
    if (c.size() != n) throw ValidationError("transition length must equal the number of rows");
    return TransitionMatrix::diagonal(std::move(c));
  }
  Matrix m = py::cast<Matrix>(arr);
  if (m.rows() != n || m.cols() != n) throw ValidationError("transition must be n x n");
  return TransitionMatrix::symmetric(std::move(m));
}

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  auto put = [&d](const char* name, const std::optional<double>& v) {
    d[name] = v ? py::cast(*v) : py::none();
  };
  put("precision", m.precision);
  put("recall", m.recall);
  put("f_measure", m.f_measure);
  put("nmi", m.nmi);
  put("gse", m.gse);
  put("lce", m.lce);
  d["learned_empty"] = m.learned_empty;
  d["truth_empty"] = m.truth_empty;
  d["nmi_degenerate"] = m.nmi_degenerate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Joint graph Laplacian and low-rank signal learning";
  mod.attr("__version__") = kVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DataError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<SolverConfig>(mod, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("beta", &SolverConfig::beta)
      .def_readwrite("gamma", &SolverConfig::gamma)
      .def_readwrite("rho", &SolverConfig::rho)
      .def_readwrite("k_outer", &SolverConfig::k_outer)
      .def_readwrite("eps_outer", &SolverConfig::eps_outer)
      .def_readwrite("k_admm", &SolverConfig::k_admm)
      .def_readwrite("tol_admm", &SolverConfig::tol_admm)
      .def_readwrite("k_cg", &SolverConfig::k_cg)
      .def_readwrite("delta_cg", &SolverConfig::delta_cg)
      .def_readwrite("proj_tol", &SolverConfig::proj_tol)
      .def_readwrite("proj_max_iter", &SolverConfig::proj_max_iter)
      .def_readwrite("warm_start", &SolverConfig::warm_start)
      .def("__repr__", [](const SolverConfig& c) {
        return "SolverConfig(" + to_json(c).dump() + ")";
      });

  py::class_<SolverResult>(mod, "SolverResult")
      .def_property_readonly("l_hat", [](const SolverResult& r) { return r.l_hat.matrix(); })
      .def_readonly("x_hat", &SolverResult::x_hat)
      .def_readonly("objective_trace", &SolverResult::objective_trace)
      .def_readonly("outer_iterations", &SolverResult::outer_iterations_used)
      .def_readonly("converged", &SolverResult::converged);

  mod.def(
      "gl_lrss",
      [](const Matrix& y, const py::object& transition, const SolverConfig& cfg) {
        const TransitionMatrix r = transition_from(transition, y.rows());
        py::gil_scoped_release release;
        return gl_lrss(y, r, cfg);
      },
      py::arg("y"), py::arg("transition") = py::none(), py::arg("config") = SolverConfig{},
      "Learn (L, X) from observations y (rows = vertices). transition: None for R = I, a 1-D "
      "array of diagonal coefficients, or a symmetric matrix.");

  mod.def(
      "project_cgl_star",
      [](const Matrix& m, double target_trace, double tol, int max_iter) {
        return project_cgl_star(m, target_trace, tol, max_iter).matrix();
      },
      py::arg("m"), py::arg("target_trace"), py::arg("tol") = 1e-8, py::arg("max_iter") = 1000);

  mod.def("svt", &svt, py::arg("m"), py::arg("tau"));

  mod.def(
      "weighted_difference",
      [](const Matrix& x, const py::object& transition) {
        return weighted_difference(x, transition_from(transition, x.rows()));
      },
      py::arg("x"), py::arg("transition") = py::none());

  mod.def(
      "validate_cgl",
      [](const Matrix& m, double tol) {
        const CglReport rep = validate_cgl(m, tol);
        return py::make_tuple(rep.ok(), rep.describe());
      },
      py::arg("m"), py::arg("tol") = CglMatrix::kDefaultTol);

  mod.def(
      "estimate_transition_acf",
      [](const Matrix& y) { return estimate_transition_acf(y).coeffs(); }, py::arg("y"));

  mod.def(
      "edge_count",
      [](const Matrix& l, double tau) {
        return edges_from_laplacian(CglMatrix::from_matrix(l), tau).count();
      },
      py::arg("l"), py::arg("tau_edge") = kDefaultEdgeThreshold);

  mod.def(
      "score",
      [](const Matrix& l_hat, const Matrix& l_true, double tau,
         const std::optional<Matrix>& x_hat, const std::optional<Matrix>& x_true) {
        const MetricsReport m =
            score(CglMatrix::from_matrix(l_hat), CglMatrix::from_matrix(l_true), tau,
                  x_hat ? &*x_hat : nullptr, x_true ? &*x_true : nullptr);
        return metrics_dict(m);
      },
      py::arg("l_hat"), py::arg("l_true"), py::arg("tau_edge") = kDefaultEdgeThreshold,
      py::arg("x_hat") = py::none(), py::arg("x_true") = py::none());

  mod.def(
      "generate_instance",
      [](Eigen::Index n, Eigen::Index m, Eigen::Index rank, double sigma_n, std::uint64_t seed,
         const std::string& graph, const std::string& transition) {
        ExperimentConfig cfg;
        cfg.graph.n = n;
        cfg.graph.kind = graph == "grid" ? GraphKind::kGrid : GraphKind::kRgg;
        if (graph != "grid" && graph != "rgg") throw ValidationError("graph must be rgg or grid");
        cfg.signal.m = m;
        cfg.signal.rank = rank;
        cfg.signal.sigma_n = sigma_n;
        if (transition == "gaussian") {
          cfg.signal.transition = GaussianTransition{};
        } else if (transition != "identity") {
          throw ValidationError("transition must be identity or gaussian");
        }
        cfg.validate();
        const SyntheticInstance inst = generate_instance(cfg, seed);
        py::dict d;
        d["L"] = inst.l_true.matrix();
        d["W"] = inst.graph.weights();
        d["X"] = inst.x;
        d["Y"] = inst.y;
        d["R"] = inst.r_true.dense();
        return d;
      },
      py::arg("n") = 30, py::arg("m") = 100, py::arg("rank") = 3, py::arg("sigma_n") = 0.5,
      py::arg("seed") = 1, py::arg("graph") = "rgg", py::arg("transition") = "identity");
}
