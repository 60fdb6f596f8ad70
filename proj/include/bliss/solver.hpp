#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "bliss/lti.hpp"
#include "bliss/numkit.hpp"

namespace bliss::solver {

struct SolverConfig {
  double radius = 1.0;  // constraint level: max_i ||U_i||_1 <= radius
  std::optional<double> rho0;     // unset: data-driven default_rho0
  std::optional<double> rho_min;  // unset: rho0 / 1024
  int fixed_phase = 200;          // iterations before rho adaptation
  double alpha = 1.2;             // adaptation threshold
  double tau = 2.0;               // adaptation factor
  int max_iters = 3000;
  double tol = 1e-6;              // on both residual Frobenius norms
  std::optional<Eigen::MatrixXd> oracle_A;  // dictionary-learning mode
};

/// Outcome of the problem reduction: thin-SVD factors (Q, Sigma, V) of
/// Xplus P (blind) or of the innovation Xplus - A X^T (oracle mode, where
/// the projector handle degenerates to the identity).
struct ReducedProblem {
  numkit::ThinSvd svd;
  numkit::ProjectorHandle proj;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index T = 0;
  bool oracle_mode = false;
};

struct HistoryEntry {
  double primal_res = 0.0;
  double dual_res = 0.0;
  double rho = 0.0;
  bool rho_at_floor = false;
};

struct SolverState {
  Eigen::MatrixXd Phi;     // m x m
  Eigen::MatrixXd U;       // T x m
  Eigen::MatrixXd Lambda;  // T x m unscaled dual
  double rho = 1.0;
  int iter = 0;  // completed steps
  double primal_res = std::numeric_limits<double>::infinity();
  double dual_res = std::numeric_limits<double>::infinity();
  std::vector<HistoryEntry> history;
};

struct SolveReport {
  Eigen::MatrixXd A_star;  // n x n
  Eigen::MatrixXd B_star;  // n x m
  Eigen::MatrixXd U_star;  // T x m
  bool converged = false;
  int iterations = 0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  double rho0 = 0.0;
  double rho_final = 0.0;
  double radius = 1.0;
  bool oracle_mode = false;
  std::vector<HistoryEntry> history;
};

/// Blind mode: thin SVD of Xplus P with P the projector onto img(X)^perp.
/// Oracle mode: thin SVD of Xplus - oracle_A X^T with identity projector.
ReducedProblem reduce(const lti::TrajectoryData& data, Eigen::Index m,
                      const std::optional<Eigen::MatrixXd>& oracle_A = {});

/// Deterministic initial state: Phi = max(1/sqrt(rho0), 1) I,
/// U = Pi_C(V Phi), Lambda = 0; feasible for the l1 constraint and the
/// sigma_min floor from step one.
SolverState initial_state(const ReducedProblem& red, const SolverConfig& cfg,
                          double rho0);

/// One Gauss-Seidel sweep: U update (l1-ball projection), Phi update
/// (log-det prox compressed through V), dual ascent; records the primal
/// residual V Phi+ - P U+ and dual residual rho V (Phi+ - Phi).
SolverState admm_step(SolverState state, const ReducedProblem& red,
                      const SolverConfig& cfg);

/// Residual-balancing rho update with the configured floor. Only meaningful
/// once state.iter >= cfg.fixed_phase. hit_floor, when given, reports that a
/// shrink was clamped.
double balance_rho(const SolverState& state, const SolverConfig& cfg,
                   bool* hit_floor = nullptr);

/// rho0 = c * sigma_max(Sigma^{-1} Q^T B_hint)^2 when a hint for B is
/// available, else c / sigma_min(Sigma)^2. Default c = 2.
double default_rho0(const ReducedProblem& red,
                    const std::optional<Eigen::MatrixXd>& B_hint = {},
                    double c = 2.0);

/// B hint consistent with the constraint level: the ground-truth pair
/// rescaled so every input column has l1 norm equal to radius, which is the
/// gauge the solver's iterates live in.
Eigen::MatrixXd rho0_hint_from_truth(
    const Eigen::Ref<const Eigen::MatrixXd>& B_true,
    const Eigen::Ref<const Eigen::MatrixXd>& U_true, double radius);

using IterationObserver = std::function<void(const SolverState&)>;

/// Full run: reduce, iterate with the fixed phase then adaptive rho, stop on
/// residual tolerance or max_iters, reconstruct (A*, B*, U*).
SolveReport solve(const lti::TrajectoryData& data, Eigen::Index m,
                  SolverConfig cfg = {},
                  const IterationObserver& observer = {});

}  // namespace bliss::solver
