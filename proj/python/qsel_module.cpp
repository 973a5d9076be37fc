#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsel/covering.hpp"
#include "qsel/experiment.hpp"
#include "qsel/landscape.hpp"
#include "qsel/model_operators.hpp"
#include "qsel/spin.hpp"
#include "qsel/symplectic.hpp"

namespace py = pybind11;

namespace {

qsel::ConfigFamily family(const std::string& name) {
  if (name == "leaf") return qsel::leaf_family();
  if (name == "four_loop_a") return qsel::four_loop_family_a();
  if (name == "four_loop_b") return qsel::four_loop_family_b();
  throw qsel::Error(qsel::ErrorKind::InvalidInput, "unknown family '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_qsel, m) {
  m.doc() = "Melin values, spin-Toeplitz spectra, model operators and cut covers";

  static py::exception<qsel::Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qsel::Error& e) {
      py::object exc = error;
      exc.attr("kind") = py::str(qsel::error_kind_name(e.kind()));
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.attr("__version__") = qsel::kToolVersion;

  m.def("melin_value", [](const Eigen::MatrixXd& mat) {
    const qsel::MelinValue v = qsel::melin_value(qsel::QuadraticForm(mat));
    py::dict d;
    d["mu"] = v.value;
    d["fast_sum"] = v.fast_sum;
    d["trace_term"] = v.trace_term;
    return d;
  }, py::arg("matrix"), "Melin value of the form v^T M v on R^{2n}.");

  m.def("symplectic_eigenvalues", [](const Eigen::MatrixXd& mat) {
    return qsel::symplectic_eigenvalues(qsel::QuadraticForm(mat)).eigenvalues;
  }, py::arg("matrix"));

  m.def("fock_melin_oracle", [](const Eigen::MatrixXd& mat, int cutoff) {
    return qsel::fock_melin_oracle(qsel::QuadraticForm(mat), cutoff);
  }, py::arg("matrix"), py::arg("cutoff"));

  m.def("family_scan", [](const std::string& name, int points, int jobs) {
    const qsel::ConfigFamily f = family(name);
    std::vector<std::pair<double, double>> out;
    for (const auto& p : qsel::family_scan(f, qsel::periodic_grid(f.theta_min, f.theta_max, points), jobs))
      out.emplace_back(p.theta, p.mu);
    return out;
  }, py::arg("family"), py::arg("points") = 64, py::arg("jobs") = 1,
     "(theta, mu) pairs along a built-in configuration family.");

  m.def("triangle_lowest", [](int N) {
    return qsel::lowest_spectrum(qsel::assemble_graph_operator(qsel::triangle_graph(), N), 2).values(0);
  }, py::arg("N"));
  m.def("triangle_casimir_ground", &qsel::triangle_casimir_ground, py::arg("N"));

  m.def("model_ground", [](const std::string& preset, double R, int M, double hbar) {
    qsel::ModelSpec s = preset == "crossing_abs" ? qsel::crossing_abs_spec()
                        : preset == "airy"       ? qsel::airy_spec()
                        : preset == "harmonic"   ? qsel::harmonic_spec(2)
                                                 : qsel::crossing_spec();
    s.R = R;
    s.M = M;
    s.hbar = hbar;
    qsel::validate_model(s);
    const qsel::GroundState g = qsel::ground_and_gap(qsel::build(s));
    return std::make_pair(g.lambda0, g.gap);
  }, py::arg("preset") = "crossing", py::arg("R") = 12.0, py::arg("M") = 239, py::arg("hbar") = 1.0,
     "(lambda0, gap) of the finite-difference model operator.");

  m.def("cover_check", [](int dim, int n, double a, double t, std::uint64_t seed) {
    const qsel::DensityGrid f = qsel::DensityGrid::random(dim, n, seed);
    const qsel::BoxCover c = qsel::cut_cover(f, a, t);
    const qsel::CoverReport r = qsel::verify_cover(c, f, a, t);
    py::dict d;
    d["passed"] = r.all();
    d["boxes"] = r.boxes;
    d["max_diameter"] = r.max_diameter;
    d["min_separation"] = r.min_separation;
    d["overlap_ratio"] = r.overlap_ratio;
    d["overlap_bound"] = r.overlap_bound;
    return d;
  }, py::arg("m"), py::arg("n"), py::arg("a"), py::arg("t"), py::arg("seed") = 1);

  m.def("run_experiment", [](const std::string& config, int jobs) {
    const qsel::ExperimentConfig cfg = qsel::parse_config(nlohmann::json::parse(config));
    qsel::RunOptions o;
    o.jobs = jobs;
    return qsel::run_experiment(cfg, o).result.dump();
  }, py::arg("config"), py::arg("jobs") = 1, "Runs a CLI config (JSON text); returns result JSON text.");
}
