#pragma once

#include <Eigen/Dense>

namespace bliss::cert {

struct L1RegressionOptions {
  double rel_gap_tol = 1e-11;
  double feas_tol = 1e-9;
  int max_iters = 200;
  // Optional linear term on w added to the objective (tie-break probes).
  Eigen::VectorXd w_bias;
};

struct L1RegressionResult {
  Eigen::VectorXd w;          // argmin, length n (possibly 0)
  double value = 0.0;         // ||A w + b||_1 at the returned w
  double kkt_residual = 0.0;  // max of duality gap and dual infeasibility
  int iterations = 0;
  bool converged = false;
};

/// min_w ||A w + b||_1 solved as the epigraph LP
///   min 1^T t  s.t.  -t <= A w + b <= t
/// with a Mehrotra predictor-corrector interior-point method. Each iteration
/// reduces to an n x n normal-equations solve, so T can be large. Under a
/// non-unique minimizer the iterates approach the analytic center of the
/// optimal face rather than an arbitrary vertex.
L1RegressionResult l1_regression(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                 const Eigen::Ref<const Eigen::VectorXd>& b,
                                 const L1RegressionOptions& opts = {});

}  // namespace bliss::cert
