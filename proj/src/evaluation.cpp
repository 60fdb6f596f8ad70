#include "bliss/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bliss/io.hpp"
#include "bliss/rng.hpp"

namespace bliss::eval {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> max_weight_assignment(
    const Eigen::Ref<const Eigen::MatrixXd>& weights) {
  const int n = static_cast<int>(weights.rows());
  if (weights.cols() != n) {
    throw std::invalid_argument("max_weight_assignment: matrix must be square");
  }
  if (n == 0) return {};

  // Kuhn-Munkres with potentials on cost = -weights, O(n^3).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> match(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) match[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return match;
}

RecoveryReport score_recovery(const solver::SolveReport& report,
                              const lti::SystemRealization& truth,
                              const Eigen::Ref<const Eigen::MatrixXd>& U_true,
                              double radius) {
  const Eigen::Index m = truth.m;
  if (report.B_star.cols() != m || report.U_star.cols() != m ||
      U_true.cols() != m) {
    throw std::invalid_argument("score_recovery: column count mismatch");
  }

  RecoveryReport out;
  out.permutation.assign(static_cast<std::size_t>(m), -1);
  out.signs.assign(static_cast<std::size_t>(m), 1);

  // Normalize both pairs to the common gauge ||U_i||_1 = radius.
  Eigen::MatrixXd U_hat = report.U_star;
  Eigen::MatrixXd B_hat = report.B_star;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = U_hat.col(i).lpNorm<1>();
    if (norm == 0.0) {
      out.zero_column = true;
      continue;
    }
    U_hat.col(i) *= radius / norm;
    B_hat.col(i) *= norm / radius;
  }
  Eigen::MatrixXd U_nat = U_true;
  Eigen::MatrixXd B_nat = truth.B;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = U_nat.col(i).lpNorm<1>();
    if (norm == 0.0) {
      throw std::invalid_argument("score_recovery: ground-truth input column " +
                                  std::to_string(i) + " is zero");
    }
    U_nat.col(i) *= radius / norm;
    B_nat.col(i) *= norm / radius;
  }

  // Absolute cosine correlation between recovered and true input columns.
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double ni = U_hat.col(i).norm();
    if (ni == 0.0) continue;  // zero column: row stays 0
    for (Eigen::Index j = 0; j < m; ++j) {
      const double nj = U_nat.col(j).norm();
      corr(i, j) = std::abs(U_hat.col(i).dot(U_nat.col(j))) / (ni * nj);
    }
  }

  const std::vector<int> match = max_weight_assignment(corr);

  Eigen::MatrixXd U_aligned(U_nat.rows(), m);
  Eigen::MatrixXd B_aligned(B_nat.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int j = match[static_cast<std::size_t>(i)];
    out.permutation[static_cast<std::size_t>(i)] = j;
    const double dot = U_hat.col(i).dot(U_nat.col(j));
    const int sign = dot < 0.0 ? -1 : 1;
    out.signs[static_cast<std::size_t>(i)] = sign;
    U_aligned.col(j) = sign * U_hat.col(i);
    B_aligned.col(j) = sign * B_hat.col(i);
  }

  out.rel_err_A = (report.A_star - truth.A).norm() / truth.A.norm();
  out.rel_err_B = (B_aligned - B_nat).norm() / B_nat.norm();
  out.rel_err_U = (U_aligned - U_nat).norm() / U_nat.norm();
  out.success = !out.zero_column &&
                std::max({out.rel_err_A, out.rel_err_B, out.rel_err_U}) <= 0.01;
  return out;
}

std::string to_string(SolveMode mode) {
  return mode == SolveMode::Blind ? "blind" : "oracle";
}

SolveMode mode_from_string(const std::string& name) {
  if (name == "blind") return SolveMode::Blind;
  if (name == "oracle") return SolveMode::Oracle;
  throw std::invalid_argument("unknown mode: " + name);
}

TrialResult run_trial(const SweepConfig& cfg, int s, Eigen::Index T,
                      int trial) {
  TrialResult out;
  try {
    const std::uint64_t trial_seed =
        rng::derive(cfg.base_seed, static_cast<std::uint64_t>(s),
                    static_cast<std::uint64_t>(T),
                    static_cast<std::uint64_t>(trial));
    const auto sys = lti::generate_system(cfg.n, cfg.m, cfg.spectral_radius,
                                          rng::derive(trial_seed, 1));
    lti::SparseInputSpec spec;
    spec.s = s;
    spec.distribution = cfg.distribution;
    spec.T = T;
    spec.seed = rng::derive(trial_seed, 2);
    spec.scale = cfg.input_scale;
    const Eigen::MatrixXd U = lti::generate_sparse_inputs(spec, cfg.m);
    lti::TrajectoryData traj = lti::simulate(sys, U);
    traj.meta.s = s;
    traj.meta.seed = trial_seed;
    traj.meta.distribution = cfg.distribution;
    traj.meta.spectral_radius = cfg.spectral_radius;
    traj.meta.input_scale = cfg.input_scale;

    solver::SolverConfig scfg = cfg.solver;
    if (cfg.mode == SolveMode::Oracle) scfg.oracle_A = sys.A;

    if (!scfg.rho0) {
      switch (cfg.rho0_policy) {
        case Rho0Policy::Fixed:
          scfg.rho0 = cfg.rho0_fixed;
          break;
        case Rho0Policy::OracleHint: {
          const auto red = solver::reduce(traj, cfg.m, scfg.oracle_A);
          scfg.rho0 = solver::default_rho0(
              red, solver::rho0_hint_from_truth(sys.B, U, scfg.radius));
          break;
        }
        case Rho0Policy::DataDriven:
          break;  // solve() applies default_rho0 without a hint
      }
    }

    const auto report = solver::solve(traj, cfg.m, scfg);
    const auto score = score_recovery(report, sys, U, scfg.radius);
    out.success = score.success;
    out.iterations = report.iterations;
    out.primal_res = report.primal_res;
    out.dual_res = report.dual_res;
    out.rel_err_A = score.rel_err_A;
    out.rel_err_B = score.rel_err_B;
    out.rel_err_U = score.rel_err_U;
  } catch (const std::exception&) {
    out.diverged = true;
    out.success = false;
  }
  return out;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.trials < 1) {
    throw std::invalid_argument("run_sweep: trials must be >= 1");
  }
  SweepResult result;
  result.config = cfg;

  struct Task {
    int s;
    Eigen::Index T;
    int trial;
    std::size_t cell;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < cfg.s_values.size(); ++si) {
    for (std::size_t ti = 0; ti < cfg.T_values.size(); ++ti) {
      const std::size_t cell = si * cfg.T_values.size() + ti;
      for (int k = 0; k < cfg.trials; ++k) {
        tasks.push_back({cfg.s_values[si], cfg.T_values[ti], k, cell});
      }
    }
  }

  std::vector<TrialResult> trial_results(tasks.size());
  int jobs = cfg.jobs > 0 ? cfg.jobs : 1;
  jobs = std::min<int>(jobs, static_cast<int>(tasks.size()));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const Task& t = tasks[i];
      trial_results[i] = run_trial(cfg, t.s, t.T, t.trial);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          const Task& t = tasks[i];
          trial_results[i] = run_trial(cfg, t.s, t.T, t.trial);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  result.cells.resize(cfg.s_values.size() * cfg.T_values.size());
  for (std::size_t si = 0; si < cfg.s_values.size(); ++si) {
    for (std::size_t ti = 0; ti < cfg.T_values.size(); ++ti) {
      auto& cell = result.cells[si * cfg.T_values.size() + ti];
      cell.s = cfg.s_values[si];
      cell.T = cfg.T_values[ti];
    }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& cell = result.cells[tasks[i].cell];
    const TrialResult& tr = trial_results[i];
    cell.trials += 1;
    cell.successes += tr.success ? 1 : 0;
    cell.mean_iters += tr.iterations;
    cell.mean_primal_res += tr.primal_res;
    cell.mean_dual_res += tr.dual_res;
  }
  for (auto& cell : result.cells) {
    if (cell.trials > 0) {
      cell.mean_iters /= cell.trials;
      cell.mean_primal_res /= cell.trials;
      cell.mean_dual_res /= cell.trials;
    }
  }
  return result;
}

namespace {

json config_to_json(const SweepConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["s_values"] = cfg.s_values;
  j["T_values"] = cfg.T_values;
  j["trials"] = cfg.trials;
  j["mode"] = to_string(cfg.mode);
  j["distribution"] = lti::to_string(cfg.distribution);
  j["spectral_radius"] = cfg.spectral_radius;
  j["input_scale"] = cfg.input_scale;
  j["base_seed"] = cfg.base_seed;
  j["jobs"] = cfg.jobs;
  switch (cfg.rho0_policy) {
    case Rho0Policy::OracleHint:
      j["rho0_policy"] = "oracle";
      break;
    case Rho0Policy::DataDriven:
      j["rho0_policy"] = "default";
      break;
    case Rho0Policy::Fixed:
      j["rho0_policy"] = "fixed";
      j["rho0_fixed"] = cfg.rho0_fixed;
      break;
  }
  json s;
  s["radius"] = cfg.solver.radius;
  if (cfg.solver.rho0) s["rho0"] = *cfg.solver.rho0;
  if (cfg.solver.rho_min) s["rho_min"] = *cfg.solver.rho_min;
  s["fixed_phase"] = cfg.solver.fixed_phase;
  s["alpha"] = cfg.solver.alpha;
  s["tau"] = cfg.solver.tau;
  s["max_iters"] = cfg.solver.max_iters;
  s["tol"] = cfg.solver.tol;
  j["solver"] = s;
  return j;
}

// Simple blue-to-red ramp for the probability heatmap.
std::string heat_color(double p) {
  const int r = static_cast<int>(40 + 200 * p);
  const int g = static_cast<int>(40 + 60 * (1.0 - std::abs(2 * p - 1)));
  const int b = static_cast<int>(40 + 200 * (1.0 - p));
  std::ostringstream out;
  out << "rgb(" << r << ',' << g << ',' << b << ')';
  return out.str();
}

void write_svg_heatmap(const SweepResult& result, const fs::path& path) {
  const auto& cfg = result.config;
  const std::size_t rows = cfg.s_values.size();
  const std::size_t cols = cfg.T_values.size();
  const int cell_px = 48;
  const int margin = 70;
  const int width = margin + static_cast<int>(cols) * cell_px + 20;
  const int height = margin + static_cast<int>(rows) * cell_px + 20;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "'>\n";
  out << "<text x='" << margin << "' y='20' font-size='14'>P(success), mode="
      << to_string(cfg.mode) << "</text>\n";
  for (std::size_t si = 0; si < rows; ++si) {
    out << "<text x='8' y='"
        << margin + static_cast<int>(si) * cell_px + cell_px / 2
        << "' font-size='12'>s=" << cfg.s_values[si] << "</text>\n";
    for (std::size_t ti = 0; ti < cols; ++ti) {
      const auto& cell = result.cells[si * cols + ti];
      const double p =
          cell.trials > 0
              ? static_cast<double>(cell.successes) / cell.trials
              : 0.0;
      out << "<rect x='" << margin + static_cast<int>(ti) * cell_px << "' y='"
          << margin + static_cast<int>(si) * cell_px << "' width='" << cell_px
          << "' height='" << cell_px << "' fill='" << heat_color(p)
          << "' stroke='white'/>\n";
    }
  }
  for (std::size_t ti = 0; ti < cols; ++ti) {
    out << "<text x='" << margin + static_cast<int>(ti) * cell_px << "' y='"
        << margin - 10 << "' font-size='12'>T=" << cfg.T_values[ti]
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void emit_results(const SweepResult& result, const fs::path& out_dir,
                  bool svg) {
  fs::create_directories(out_dir);

  {
    const fs::path csv_path = out_dir / "sweep.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    csv << "s,T,mode,trials,successes,p_success,mean_iters\n";
    for (const auto& cell : result.cells) {
      const double p = cell.trials > 0
                           ? static_cast<double>(cell.successes) / cell.trials
                           : 0.0;
      csv << cell.s << ',' << cell.T << ',' << to_string(result.config.mode)
          << ',' << cell.trials << ',' << cell.successes << ','
          << io::format_double(p) << ',' << io::format_double(cell.mean_iters)
          << '\n';
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
  }

  {
    json grid;
    grid["mode"] = to_string(result.config.mode);
    grid["s_values"] = result.config.s_values;
    grid["T_values"] = result.config.T_values;
    grid["trials"] = result.config.trials;
    std::vector<std::vector<double>> p_grid;
    std::vector<std::vector<double>> iter_grid;
    const std::size_t cols = result.config.T_values.size();
    for (std::size_t si = 0; si < result.config.s_values.size(); ++si) {
      std::vector<double> p_row, iter_row;
      for (std::size_t ti = 0; ti < cols; ++ti) {
        const auto& cell = result.cells[si * cols + ti];
        p_row.push_back(cell.trials > 0 ? static_cast<double>(cell.successes) /
                                              cell.trials
                                        : 0.0);
        iter_row.push_back(cell.mean_iters);
      }
      p_grid.push_back(std::move(p_row));
      iter_grid.push_back(std::move(iter_row));
    }
    grid["p_success"] = p_grid;
    grid["mean_iters"] = iter_grid;
    std::ofstream out(out_dir / "heatmap.json");
    if (!out) {
      throw std::runtime_error("cannot write " +
                               (out_dir / "heatmap.json").string());
    }
    out << grid.dump(2) << '\n';
  }

  {
    std::ofstream out(out_dir / "manifest.json");
    if (!out) {
      throw std::runtime_error("cannot write " +
                               (out_dir / "manifest.json").string());
    }
    out << config_to_json(result.config).dump(2) << '\n';
  }

  if (svg) write_svg_heatmap(result, out_dir / "heatmap.svg");
}

SweepConfig desk_preset() {
  SweepConfig cfg;
  cfg.n = 20;
  cfg.m = 5;
  cfg.s_values = {1, 2, 3, 4, 5};
  cfg.T_values = {100, 250, 500};
  cfg.trials = 20;
  return cfg;
}

SweepConfig paper_preset() {
  SweepConfig cfg;
  cfg.n = 100;
  cfg.m = 25;
  cfg.s_values = {1, 2, 4, 6, 9, 13, 18, 25};
  cfg.T_values = {200, 800, 1400, 2000};
  cfg.trials = 50;
  return cfg;
}

}  // namespace bliss::eval
