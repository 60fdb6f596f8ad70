// bliss command line: simulate / solve / certify / sweep / score.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "bliss/certificate.hpp"
#include "bliss/evaluation.hpp"
#include "bliss/io.hpp"
#include "bliss/lti.hpp"
#include "bliss/rng.hpp"
#include "bliss/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bliss;

namespace {

json history_to_json(const std::vector<solver::HistoryEntry>& history) {
  json primal = json::array();
  json dual = json::array();
  json rho = json::array();
  json floor_hits = json::array();
  for (std::size_t k = 0; k < history.size(); ++k) {
    primal.push_back(history[k].primal_res);
    dual.push_back(history[k].dual_res);
    rho.push_back(history[k].rho);
    if (history[k].rho_at_floor) floor_hits.push_back(k);
  }
  return json{{"primal", primal},
              {"dual", dual},
              {"rho", rho},
              {"floor_hits", floor_hits}};
}

void save_solve_report(const fs::path& dir, const solver::SolveReport& report,
                       Eigen::Index m) {
  fs::create_directories(dir);
  io::write_matrix_csv(dir / "A_star.csv", report.A_star);
  io::write_matrix_csv(dir / "B_star.csv", report.B_star);
  io::write_matrix_csv(dir / "U_star.csv", report.U_star);

  json j;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["final_primal_residual"] = report.primal_res;
  j["final_dual_residual"] = report.dual_res;
  j["rho0"] = report.rho0;
  j["rho_final"] = report.rho_final;
  j["radius"] = report.radius;
  j["m"] = m;
  j["mode"] = report.oracle_mode ? "oracle" : "blind";
  j["history"] = history_to_json(report.history);
  std::ofstream out(dir / "report.json");
  if (!out) {
    throw std::runtime_error("cannot write " + (dir / "report.json").string());
  }
  out << j.dump(2) << '\n';
}

json certificate_to_json(const cert::CertificateReport& report) {
  json j;
  j["overall"] = cert::to_string(report.overall);
  j["num_samples"] = report.num_samples;
  j["tol"] = report.tol;
  j["seed"] = report.seed;
  j["lp_failures"] = report.lp_failures;
  j["notes"] = report.notes;

  j["c1"] = {{"pass", report.c1_pass},
             {"min_margin", report.c1_min_margin},
             {"argmin_sample", report.c1_argmin_index}};

  json c2 = {{"pass", report.c2_pass},
             {"num_nonsparse_samples", report.c2_num_nonsparse},
             {"basis_max_deviation", report.c2_basis_max_dev}};
  if (report.c2_num_nonsparse > 0) c2["sparse_gap"] = report.c2_sparse_gap;
  if (std::isfinite(report.c2_pairwise_min_margin)) {
    c2["pairwise_min_margin"] = report.c2_pairwise_min_margin;
  }
  json violations = json::array();
  for (const auto& v : report.c2_violations) {
    violations.push_back({{"i", v.i},
                          {"j", v.j},
                          {"sign", v.sign},
                          {"omega", v.omega_value},
                          {"margin", v.margin}});
  }
  c2["violations"] = violations;
  j["c2"] = c2;

  json c3 = json::array();
  for (const auto& e : report.c3_results) {
    c3.push_back({{"omega", e.omega_value},
                  {"w_norm", e.w_norm},
                  {"w_norm_perturbed", e.w_norm_perturbed},
                  {"kkt_residual", e.kkt_residual},
                  {"pass", e.pass}});
  }
  j["c3"] = {{"pass", report.c3_pass}, {"per_basis", c3}};
  return j;
}

json recovery_to_json(const eval::RecoveryReport& score) {
  return json{{"permutation", score.permutation},
              {"signs", score.signs},
              {"rel_err_A", score.rel_err_A},
              {"rel_err_B", score.rel_err_B},
              {"rel_err_U", score.rel_err_U},
              {"success", score.success},
              {"zero_column", score.zero_column}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind identification of linear systems with sparse inputs"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand(
      "simulate", "Generate a system, sparse inputs and a trajectory");
  struct {
    Eigen::Index n = 20, m = 5, T = 500;
    int s = 1;
    std::string dist = "gaussian";
    double rho_spec = 0.9;
    double scale = 1.0;
    std::uint64_t seed = 0;
    std::string out;
  } sim_opts;
  sim->add_option("--n", sim_opts.n, "State dimension")->required();
  sim->add_option("--m", sim_opts.m, "Input dimension")->required();
  sim->add_option("--T", sim_opts.T, "Trajectory length")->required();
  sim->add_option("--s", sim_opts.s, "Nonzeros per input")->required();
  sim->add_option("--dist", sim_opts.dist, "gaussian|laplace")
      ->check(CLI::IsMember({"gaussian", "laplace"}));
  sim->add_option("--rho-spec", sim_opts.rho_spec, "Spectral radius of A");
  sim->add_option("--scale", sim_opts.scale, "Nonzero magnitude scale");
  sim->add_option("--seed", sim_opts.seed, "Master seed")->required();
  sim->add_option("--out", sim_opts.out, "Output directory")->required();

  // ---- solve ----
  auto* slv = app.add_subcommand("solve", "Run the solver on a trajectory");
  struct {
    std::string data;
    Eigen::Index m = 0;
    std::string oracle_a;
    double radius = 1.0;
    std::string rho0 = "default";
    double alpha = 1.2, tau = 2.0, tol = 1e-6;
    int fixed_phase = 200, max_iters = 3000;
    std::string out;
  } slv_opts;
  slv->add_option("--data", slv_opts.data, "Trajectory directory")->required();
  slv->add_option("--m", slv_opts.m, "Input dimension")->required();
  slv->add_option("--oracle-a", slv_opts.oracle_a,
                  "CSV with a known A (dictionary-learning mode)");
  slv->add_option("--radius", slv_opts.radius, "l1 constraint level");
  slv->add_option("--rho0", slv_opts.rho0,
                  "Initial penalty: a number, 'oracle' (needs ground truth in "
                  "the data directory) or 'default'");
  slv->add_option("--alpha", slv_opts.alpha, "Adaptation threshold");
  slv->add_option("--tau", slv_opts.tau, "Adaptation factor");
  slv->add_option("--fixed-phase", slv_opts.fixed_phase,
                  "Iterations before adaptation");
  slv->add_option("--max-iters", slv_opts.max_iters, "Iteration cap");
  slv->add_option("--tol", slv_opts.tol, "Residual tolerance");
  slv->add_option("--out", slv_opts.out, "Output directory")->required();

  // ---- certify ----
  auto* cer = app.add_subcommand(
      "certify", "Check the persistent-scattering conditions on a trajectory");
  struct {
    std::string data;
    int samples = 1000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string out;
  } cer_opts;
  cer->add_option("--data", cer_opts.data, "Trajectory directory")->required();
  cer->add_option("--samples", cer_opts.samples, "Sphere samples for C1/C2");
  cer->add_option("--tol", cer_opts.tol, "Decision tolerance");
  cer->add_option("--seed", cer_opts.seed, "Sampling seed");
  cer->add_option("--jobs", cer_opts.jobs, "Concurrent LP evaluations");
  cer->add_option("--out", cer_opts.out, "Report path (JSON)")->required();

  // ---- sweep ----
  auto* swp = app.add_subcommand(
      "sweep", "Phase-transition experiment over (s, T) cells");
  struct {
    std::string preset = "desk";
    std::string mode = "blind";
    std::string dist = "gaussian";
    int trials = 0;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::string rho0 = "oracle";
    bool svg = false;
    std::string out;
  } swp_opts;
  swp->add_option("--preset", swp_opts.preset, "paper|desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  swp->add_option("--mode", swp_opts.mode, "blind|oracle")
      ->check(CLI::IsMember({"blind", "oracle"}));
  swp->add_option("--dist", swp_opts.dist, "gaussian|laplace")
      ->check(CLI::IsMember({"gaussian", "laplace"}));
  swp->add_option("--trials", swp_opts.trials, "Trials per cell (0: preset)");
  swp->add_option("--jobs", swp_opts.jobs, "Concurrent trials");
  swp->add_option("--seed", swp_opts.seed, "Base seed");
  swp->add_option("--rho0", swp_opts.rho0,
                  "Penalty policy: 'oracle', 'default' or a number");
  swp->add_flag("--svg", swp_opts.svg, "Also write heatmap.svg");
  swp->add_option("--out", swp_opts.out, "Output directory")->required();

  // ---- score ----
  auto* sco = app.add_subcommand(
      "score", "Score a solve report against ground truth");
  struct {
    std::string report;
    std::string truth;
    std::string out;
  } sco_opts;
  sco->add_option("--report", sco_opts.report, "Solve output directory")
      ->required();
  sco->add_option("--truth", sco_opts.truth, "Truth trajectory directory")
      ->required();
  sco->add_option("--out", sco_opts.out, "Optional JSON output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const auto sys = lti::generate_system(
          sim_opts.n, sim_opts.m, sim_opts.rho_spec,
          rng::derive(sim_opts.seed, 1));
      lti::SparseInputSpec spec;
      spec.s = sim_opts.s;
      spec.distribution = lti::distribution_from_string(sim_opts.dist);
      spec.T = sim_opts.T;
      spec.seed = rng::derive(sim_opts.seed, 2);
      spec.scale = sim_opts.scale;
      const Eigen::MatrixXd U = lti::generate_sparse_inputs(spec, sim_opts.m);
      lti::TrajectoryData traj = lti::simulate(sys, U);
      traj.meta.s = sim_opts.s;
      traj.meta.seed = sim_opts.seed;
      traj.meta.distribution = spec.distribution;
      traj.meta.spectral_radius = sim_opts.rho_spec;
      traj.meta.input_scale = sim_opts.scale;
      io::save_trajectory(sim_opts.out, traj, &sys);
      if (sys.retries > 0) {
        std::cerr << "note: resampled " << sys.retries
                  << " degenerate draw(s)\n";
      }
      std::cout << "wrote trajectory to " << sim_opts.out << "\n";
    } else if (slv->parsed()) {
      const auto traj = io::load_trajectory(slv_opts.data);
      solver::SolverConfig cfg;
      cfg.radius = slv_opts.radius;
      cfg.alpha = slv_opts.alpha;
      cfg.tau = slv_opts.tau;
      cfg.tol = slv_opts.tol;
      cfg.fixed_phase = slv_opts.fixed_phase;
      cfg.max_iters = slv_opts.max_iters;
      if (!slv_opts.oracle_a.empty()) {
        cfg.oracle_A = io::read_matrix_csv(slv_opts.oracle_a);
      }
      if (slv_opts.rho0 == "oracle") {
        const auto sys = io::load_system(slv_opts.data);
        if (!sys || !traj.U_true) {
          throw std::runtime_error(
              "--rho0 oracle needs B_true.csv and U_true.csv in the data "
              "directory");
        }
        const auto red = solver::reduce(traj, slv_opts.m, cfg.oracle_A);
        cfg.rho0 = solver::default_rho0(
            red,
            solver::rho0_hint_from_truth(sys->B, *traj.U_true, cfg.radius));
      } else if (slv_opts.rho0 != "default") {
        cfg.rho0 = io::parse_double(slv_opts.rho0);
      }
      const auto report = solver::solve(traj, slv_opts.m, cfg);
      save_solve_report(slv_opts.out, report, slv_opts.m);
      std::cout << (report.converged ? "converged" : "not converged") << " in "
                << report.iterations << " iterations (primal "
                << report.primal_res << ", dual " << report.dual_res << ")\n";
    } else if (cer->parsed()) {
      const auto traj = io::load_trajectory(cer_opts.data);
      if (!traj.U_true) {
        throw std::runtime_error(
            "certify needs U_true.csv (ground-truth inputs) in the data "
            "directory");
      }
      const auto np = cert::normalize_pair(traj.X, *traj.U_true);
      cert::CertifyOptions opts;
      opts.num_samples = cer_opts.samples;
      opts.tol = cer_opts.tol;
      opts.seed = cer_opts.seed;
      opts.jobs = cer_opts.jobs;
      const auto report = cert::check_persistent_scattering(np, opts);
      const fs::path out_path(cer_opts.out);
      if (out_path.has_parent_path()) {
        fs::create_directories(out_path.parent_path());
      }
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + cer_opts.out);
      out << certificate_to_json(report).dump(2) << '\n';
      std::cout << cert::to_string(report.overall) << " (C1 margin "
                << report.c1_min_margin << ", C3 "
                << (report.c3_pass ? "pass" : "fail") << ")\n";
    } else if (swp->parsed()) {
      eval::SweepConfig cfg = swp_opts.preset == "paper"
                                  ? eval::paper_preset()
                                  : eval::desk_preset();
      cfg.mode = eval::mode_from_string(swp_opts.mode);
      cfg.distribution = lti::distribution_from_string(swp_opts.dist);
      if (swp_opts.trials > 0) cfg.trials = swp_opts.trials;
      cfg.jobs = swp_opts.jobs;
      cfg.base_seed = swp_opts.seed;
      if (swp_opts.rho0 == "oracle") {
        cfg.rho0_policy = eval::Rho0Policy::OracleHint;
      } else if (swp_opts.rho0 == "default") {
        cfg.rho0_policy = eval::Rho0Policy::DataDriven;
      } else {
        cfg.rho0_policy = eval::Rho0Policy::Fixed;
        cfg.rho0_fixed = io::parse_double(swp_opts.rho0);
      }
      const auto result = eval::run_sweep(cfg);
      eval::emit_results(result, swp_opts.out, swp_opts.svg);
      std::cout << "wrote sweep results to " << swp_opts.out << "\n";
    } else if (sco->parsed()) {
      const auto truth_traj = io::load_trajectory(sco_opts.truth);
      const auto truth_sys = io::load_system(sco_opts.truth);
      if (!truth_sys || !truth_traj.U_true) {
        throw std::runtime_error(
            "truth directory must contain A_true.csv, B_true.csv and "
            "U_true.csv");
      }
      solver::SolveReport report;
      report.A_star = io::read_matrix_csv(fs::path(sco_opts.report) / "A_star.csv");
      report.B_star = io::read_matrix_csv(fs::path(sco_opts.report) / "B_star.csv");
      report.U_star = io::read_matrix_csv(fs::path(sco_opts.report) / "U_star.csv");
      double radius = 1.0;
      {
        std::ifstream in(fs::path(sco_opts.report) / "report.json");
        if (in) {
          const json j = json::parse(in);
          radius = j.value("radius", 1.0);
        }
      }
      const auto score = eval::score_recovery(report, *truth_sys,
                                              *truth_traj.U_true, radius);
      const json j = recovery_to_json(score);
      std::cout << j.dump(2) << "\n";
      if (!sco_opts.out.empty()) {
        std::ofstream out(sco_opts.out);
        if (!out) throw std::runtime_error("cannot write " + sco_opts.out);
        out << j.dump(2) << '\n';
      }
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
