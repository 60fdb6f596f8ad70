#include "bliss/solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bliss::solver {

ReducedProblem reduce(const lti::TrajectoryData& data, Eigen::Index m,
                      const std::optional<Eigen::MatrixXd>& oracle_A) {
  const Eigen::Index T = data.X.rows();
  const Eigen::Index n = data.X.cols();
  if (data.Xplus.rows() != n || data.Xplus.cols() != T) {
    throw std::invalid_argument("reduce: X / Xplus shape mismatch");
  }

  ReducedProblem red;
  red.n = n;
  red.m = m;
  red.T = T;

  Eigen::MatrixXd innovation;  // n x T
  if (oracle_A) {
    if (oracle_A->rows() != n || oracle_A->cols() != n) {
      throw std::invalid_argument("reduce: oracle A must be n x n");
    }
    red.oracle_mode = true;
    red.proj = numkit::ProjectorHandle::identity(T);
    innovation = data.Xplus - (*oracle_A) * data.X.transpose();
  } else {
    red.proj = numkit::projector_complement(data.X);
    // Xplus P = (P Xplus^T)^T since the projector is symmetric.
    innovation = red.proj.apply(data.Xplus.transpose()).transpose();
  }

  red.svd = numkit::thin_svd_rank_m(innovation, m);
  return red;
}

SolverState initial_state(const ReducedProblem& red, const SolverConfig& cfg,
                          double rho0) {
  SolverState state;
  state.rho = rho0;
  const double diag = std::max(1.0 / std::sqrt(rho0), 1.0);
  state.Phi = diag * Eigen::MatrixXd::Identity(red.m, red.m);
  state.U = numkit::project_l1_columns(red.svd.V * state.Phi, cfg.radius);
  state.Lambda = Eigen::MatrixXd::Zero(red.T, red.m);
  return state;
}

SolverState admm_step(SolverState state, const ReducedProblem& red,
                      const SolverConfig& cfg) {
  const double rho = state.rho;
  const Eigen::MatrixXd& V = red.svd.V;

  // U+ = Pi_C(V Phi + Lambda/rho + (I - P) U)
  Eigen::MatrixXd u_arg = V * state.Phi + state.Lambda / rho;
  if (!red.oracle_mode) u_arg += red.proj.range_part(state.U);
  Eigen::MatrixXd U_next = numkit::project_l1_columns(u_arg, cfg.radius);

  // Phi+ = prox_{f/rho}(V^T (P U+ - Lambda/rho))
  Eigen::MatrixXd PU_next = red.proj.apply(U_next);
  Eigen::MatrixXd W = V.transpose() * (PU_next - state.Lambda / rho);
  Eigen::MatrixXd Phi_next = numkit::prox_neg_logdet(W, 1.0 / rho);

  // Lambda+ = Lambda + rho (V Phi+ - P U+)
  Eigen::MatrixXd primal = V * Phi_next - PU_next;
  state.Lambda += rho * primal;

  state.primal_res = primal.norm();
  state.dual_res = rho * (V * (Phi_next - state.Phi)).norm();
  state.Phi = std::move(Phi_next);
  state.U = std::move(U_next);
  state.iter += 1;
  state.history.push_back(
      {state.primal_res, state.dual_res, rho, /*rho_at_floor=*/false});

  if (!state.Phi.allFinite() || !state.U.allFinite() ||
      !state.Lambda.allFinite()) {
    std::ostringstream msg;
    msg << "admm_step: non-finite iterate at iteration " << state.iter;
    throw std::runtime_error(msg.str());
  }
  return state;
}

double balance_rho(const SolverState& state, const SolverConfig& cfg,
                   bool* hit_floor) {
  const double rho_min = cfg.rho_min.value_or(cfg.rho0.value_or(0.0));
  if (hit_floor != nullptr) *hit_floor = false;

  const double r = state.primal_res;
  const double s = state.dual_res;
  double rho = state.rho;
  if (r >= cfg.alpha * s) {
    rho = cfg.tau * state.rho;
  } else if (s >= cfg.alpha * r) {
    rho = state.rho / cfg.tau;
    if (rho < rho_min) {
      rho = rho_min;
      if (hit_floor != nullptr) *hit_floor = true;
    }
  }
  return rho;
}

double default_rho0(const ReducedProblem& red,
                    const std::optional<Eigen::MatrixXd>& B_hint, double c) {
  if (B_hint) {
    if (B_hint->rows() != red.n || B_hint->cols() != red.m) {
      throw std::invalid_argument("default_rho0: B hint must be n x m");
    }
    const Eigen::MatrixXd scaled =
        red.svd.sigma.cwiseInverse().asDiagonal() *
        (red.svd.Q.transpose() * (*B_hint));
    const double sigma_max =
        Eigen::JacobiSVD<Eigen::MatrixXd>(scaled).singularValues()(0);
    return c * sigma_max * sigma_max;
  }
  const double sigma_min = red.svd.sigma(red.m - 1);
  return c / (sigma_min * sigma_min);
}

Eigen::MatrixXd rho0_hint_from_truth(
    const Eigen::Ref<const Eigen::MatrixXd>& B_true,
    const Eigen::Ref<const Eigen::MatrixXd>& U_true, double radius) {
  if (B_true.cols() != U_true.cols()) {
    throw std::invalid_argument("rho0_hint_from_truth: column mismatch");
  }
  Eigen::MatrixXd hint = B_true;
  for (Eigen::Index i = 0; i < hint.cols(); ++i) {
    hint.col(i) *= U_true.col(i).lpNorm<1>() / radius;
  }
  return hint;
}

SolveReport solve(const lti::TrajectoryData& data, Eigen::Index m,
                  SolverConfig cfg, const IterationObserver& observer) {
  if (!(cfg.radius > 0.0) || !(cfg.alpha > 1.0) || !(cfg.tau > 1.0) ||
      !(cfg.tol > 0.0)) {
    throw std::invalid_argument("solve: invalid configuration");
  }

  ReducedProblem red = reduce(data, m, cfg.oracle_A);
  const double rho0 = cfg.rho0 ? *cfg.rho0 : default_rho0(red);
  cfg.rho0 = rho0;
  if (!cfg.rho_min) cfg.rho_min = rho0;

  SolverState state = initial_state(red, cfg, rho0);

  // Residual balancing can lock onto a stagnant orbit when rho sits below
  // the admissible floor of Corollary 1 (the prox then pins sigma_min(Phi)
  // above the target's). The only cure in that regime is a larger rho, so a
  // long stretch without progress forces an increase.
  constexpr int kStagnationWindow = 50;
  constexpr double kStagnationResidualFactor = 10.0;
  double best_residual_sum = std::numeric_limits<double>::infinity();
  int since_best = 0;

  bool converged = false;
  while (state.iter < cfg.max_iters) {
    if (state.iter >= cfg.fixed_phase) {
      if (since_best >= kStagnationWindow &&
          std::max(state.primal_res, state.dual_res) >
              kStagnationResidualFactor * cfg.tol) {
        // Ratchet the floor so residual balancing cannot undo the escape.
        state.rho = cfg.tau * state.rho;
        cfg.rho_min = std::max(*cfg.rho_min, state.rho);
        since_best = 0;
      } else {
        bool hit_floor = false;
        state.rho = balance_rho(state, cfg, &hit_floor);
        if (hit_floor && !state.history.empty()) {
          state.history.back().rho_at_floor = true;
        }
      }
    }
    state = admm_step(std::move(state), red, cfg);
    if (observer) observer(state);

    const double residual_sum = state.primal_res + state.dual_res;
    if (residual_sum < (1.0 - 1e-3) * best_residual_sum) {
      best_residual_sum = residual_sum;
      since_best = 0;
    } else {
      ++since_best;
    }

    if (state.primal_res < cfg.tol && state.dual_res < cfg.tol) {
      converged = true;
      break;
    }
  }

  SolveReport report;
  report.converged = converged;
  report.iterations = state.iter;
  report.primal_res = state.primal_res;
  report.dual_res = state.dual_res;
  report.rho0 = rho0;
  report.rho_final = state.rho;
  report.radius = cfg.radius;
  report.oracle_mode = red.oracle_mode;

  // B* = Q Sigma Phi*^{-T}; U* = U; A* = (Xplus - B* U*^T)(X^T)^+.
  report.U_star = state.U;
  report.B_star = red.svd.Q * red.svd.sigma.asDiagonal() *
                  state.Phi.inverse().transpose();
  if (red.oracle_mode) {
    report.A_star = *cfg.oracle_A;
  } else {
    const Eigen::MatrixXd residual =
        data.Xplus - report.B_star * report.U_star.transpose();
    // A*^T = X^+ residual^T, computed as a min-norm least-squares solve.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(data.X);
    report.A_star = cod.solve(residual.transpose()).transpose();
  }
  report.history = std::move(state.history);
  return report;
}

}  // namespace bliss::solver
