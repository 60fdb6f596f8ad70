#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bliss/certificate.hpp"
#include "bliss/evaluation.hpp"
#include "bliss/lti.hpp"
#include "bliss/numkit.hpp"
#include "bliss/solver.hpp"

namespace py = pybind11;
using namespace bliss;

namespace {

lti::Distribution parse_dist(const std::string& name) {
  return lti::distribution_from_string(name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Blind identification of linear systems with sparse inputs";

  // ---- lti ----
  py::class_<lti::SystemRealization>(m, "SystemRealization")
      .def_readonly("A", &lti::SystemRealization::A)
      .def_readonly("B", &lti::SystemRealization::B)
      .def_readonly("n", &lti::SystemRealization::n)
      .def_readonly("m", &lti::SystemRealization::m)
      .def_readonly("retries", &lti::SystemRealization::retries);

  py::class_<lti::TrajectoryData>(m, "TrajectoryData")
      .def_readonly("X", &lti::TrajectoryData::X)
      .def_readonly("Xplus", &lti::TrajectoryData::Xplus)
      .def_property_readonly("U_true",
                             [](const lti::TrajectoryData& t) {
                               return t.U_true ? py::cast(*t.U_true)
                                               : py::none().cast<py::object>();
                             });

  m.def("generate_system", &lti::generate_system, py::arg("n"), py::arg("m"),
        py::arg("spectral_radius"), py::arg("seed"));

  m.def(
      "generate_sparse_inputs",
      [](int s, const std::string& dist, Eigen::Index T, std::uint64_t seed,
         double scale, Eigen::Index m_dim) {
        lti::SparseInputSpec spec{s, parse_dist(dist), T, seed, scale};
        return lti::generate_sparse_inputs(spec, m_dim);
      },
      py::arg("s"), py::arg("distribution"), py::arg("T"), py::arg("seed"),
      py::arg("scale"), py::arg("m"));

  m.def(
      "simulate",
      [](const lti::SystemRealization& sys, const Eigen::MatrixXd& U,
         std::optional<Eigen::VectorXd> x0) {
        return x0 ? lti::simulate(sys, U, *x0) : lti::simulate(sys, U);
      },
      py::arg("system"), py::arg("U"), py::arg("x0") = std::nullopt);

  m.def(
      "persistency_rank",
      [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& U) {
        const auto r = lti::persistency_rank(X, U);
        return py::dict(py::arg("rank") = r.rank,
                        py::arg("persistently_exciting") =
                            r.persistently_exciting,
                        py::arg("threshold") = r.threshold,
                        py::arg("reason") = r.reason);
      },
      py::arg("X"), py::arg("U"));

  m.def("spectral_radius", &lti::spectral_radius_of, py::arg("A"));

  // ---- numkit ----
  m.def("prox_neg_logdet", &numkit::prox_neg_logdet, py::arg("W"),
        py::arg("lam"));
  m.def("project_l1_columns", &numkit::project_l1_columns, py::arg("M"),
        py::arg("radius"));
  m.def("volume", &numkit::volume, py::arg("B"));

  // ---- solver ----
  py::class_<solver::SolveReport>(m, "SolveReport")
      .def_readonly("A_star", &solver::SolveReport::A_star)
      .def_readonly("B_star", &solver::SolveReport::B_star)
      .def_readonly("U_star", &solver::SolveReport::U_star)
      .def_readonly("converged", &solver::SolveReport::converged)
      .def_readonly("iterations", &solver::SolveReport::iterations)
      .def_readonly("primal_res", &solver::SolveReport::primal_res)
      .def_readonly("dual_res", &solver::SolveReport::dual_res)
      .def_readonly("rho0", &solver::SolveReport::rho0)
      .def_readonly("rho_final", &solver::SolveReport::rho_final)
      .def_property_readonly("history", [](const solver::SolveReport& r) {
        py::list out;
        for (const auto& h : r.history) {
          out.append(py::dict(py::arg("primal") = h.primal_res,
                              py::arg("dual") = h.dual_res,
                              py::arg("rho") = h.rho,
                              py::arg("rho_at_floor") = h.rho_at_floor));
        }
        return out;
      });

  m.def(
      "solve",
      [](const lti::TrajectoryData& data, Eigen::Index m_dim, double radius,
         std::optional<double> rho0, std::optional<double> rho_min,
         int fixed_phase, double alpha, double tau, int max_iters, double tol,
         std::optional<Eigen::MatrixXd> oracle_A) {
        solver::SolverConfig cfg;
        cfg.radius = radius;
        cfg.rho0 = rho0;
        cfg.rho_min = rho_min;
        cfg.fixed_phase = fixed_phase;
        cfg.alpha = alpha;
        cfg.tau = tau;
        cfg.max_iters = max_iters;
        cfg.tol = tol;
        if (oracle_A) cfg.oracle_A = *oracle_A;
        py::gil_scoped_release release;
        return solver::solve(data, m_dim, cfg);
      },
      py::arg("data"), py::arg("m"), py::arg("radius") = 1.0,
      py::arg("rho0") = std::nullopt, py::arg("rho_min") = std::nullopt,
      py::arg("fixed_phase") = 200, py::arg("alpha") = 1.2,
      py::arg("tau") = 2.0, py::arg("max_iters") = 3000,
      py::arg("tol") = 1e-6, py::arg("oracle_A") = std::nullopt);

  m.def(
      "oracle_rho0",
      [](const lti::TrajectoryData& data, Eigen::Index m_dim,
         const Eigen::MatrixXd& B_true, const Eigen::MatrixXd& U_true,
         double radius, std::optional<Eigen::MatrixXd> oracle_A) {
        std::optional<Eigen::MatrixXd> oa;
        if (oracle_A) oa = *oracle_A;
        const auto red = solver::reduce(data, m_dim, oa);
        return solver::default_rho0(
            red, solver::rho0_hint_from_truth(B_true, U_true, radius));
      },
      py::arg("data"), py::arg("m"), py::arg("B_true"), py::arg("U_true"),
      py::arg("radius") = 1.0, py::arg("oracle_A") = std::nullopt,
      "Penalty initialization from ground truth, in the constraint gauge");

  // ---- evaluation ----
  py::class_<eval::RecoveryReport>(m, "RecoveryReport")
      .def_readonly("permutation", &eval::RecoveryReport::permutation)
      .def_readonly("signs", &eval::RecoveryReport::signs)
      .def_readonly("rel_err_A", &eval::RecoveryReport::rel_err_A)
      .def_readonly("rel_err_B", &eval::RecoveryReport::rel_err_B)
      .def_readonly("rel_err_U", &eval::RecoveryReport::rel_err_U)
      .def_readonly("success", &eval::RecoveryReport::success)
      .def_readonly("zero_column", &eval::RecoveryReport::zero_column);

  m.def(
      "score_recovery",
      [](const solver::SolveReport& report, const lti::SystemRealization& sys,
         const Eigen::MatrixXd& U_true, double radius) {
        return eval::score_recovery(report, sys, U_true, radius);
      },
      py::arg("report"), py::arg("truth"), py::arg("U_true"),
      py::arg("radius") = 1.0);

  // ---- certificate ----
  py::class_<cert::NormalizedPair>(m, "NormalizedPair")
      .def_readonly("Xt", &cert::NormalizedPair::Xt)
      .def_readonly("Ut", &cert::NormalizedPair::Ut)
      .def_readonly("u_norms", &cert::NormalizedPair::u_norms);

  m.def("normalize_pair", &cert::normalize_pair, py::arg("X"), py::arg("U"));
  m.def("support_function", &cert::support_function, py::arg("pair"),
        py::arg("w"), py::arg("v"));
  m.def(
      "omega",
      [](const cert::NormalizedPair& np, const Eigen::VectorXd& v) {
        const auto res = cert::omega(np, v);
        return py::dict(py::arg("value") = res.value,
                        py::arg("w_star") = res.w_star,
                        py::arg("kkt_residual") = res.kkt_residual,
                        py::arg("converged") = res.converged);
      },
      py::arg("pair"), py::arg("v"));

  m.def(
      "check_persistent_scattering",
      [](const cert::NormalizedPair& np, int num_samples, std::uint64_t seed,
         double tol, int jobs) {
        cert::CertifyOptions opts;
        opts.num_samples = num_samples;
        opts.seed = seed;
        opts.tol = tol;
        opts.jobs = jobs;
        cert::CertificateReport r;
        {
          py::gil_scoped_release release;
          r = cert::check_persistent_scattering(np, opts);
        }
        py::list c3;
        for (const auto& e : r.c3_results) {
          c3.append(py::dict(py::arg("omega") = e.omega_value,
                             py::arg("w_norm") = e.w_norm,
                             py::arg("w_norm_perturbed") = e.w_norm_perturbed,
                             py::arg("pass") = e.pass));
        }
        return py::dict(py::arg("overall") = cert::to_string(r.overall),
                        py::arg("c1_pass") = r.c1_pass,
                        py::arg("c1_min_margin") = r.c1_min_margin,
                        py::arg("c2_pass") = r.c2_pass,
                        py::arg("c3_pass") = r.c3_pass,
                        py::arg("c3") = c3,
                        py::arg("lp_failures") = r.lp_failures);
      },
      py::arg("pair"), py::arg("num_samples") = 1000, py::arg("seed") = 0,
      py::arg("tol") = 1e-6, py::arg("jobs") = 0);

  m.attr("__version__") = "0.1.0";
}
