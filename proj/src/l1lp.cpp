#include "bliss/l1lp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bliss::cert {

namespace {

// Largest alpha in (0, 1] with v + alpha * dv >= (1 - eta) * v elementwise.
double step_to_boundary(const Eigen::VectorXd& v, const Eigen::VectorXd& dv,
                        double eta) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) {
      alpha = std::min(alpha, -eta * v(i) / dv(i));
    }
  }
  return alpha;
}

}  // namespace

L1RegressionResult l1_regression(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                 const Eigen::Ref<const Eigen::VectorXd>& b,
                                 const L1RegressionOptions& opts) {
  const Eigen::Index T = b.size();
  const Eigen::Index n = A.cols();
  if (A.rows() != T) {
    throw std::invalid_argument("l1_regression: A rows must match b");
  }

  L1RegressionResult result;
  result.w = Eigen::VectorXd::Zero(n);

  const bool biased = opts.w_bias.size() > 0;
  if (biased && opts.w_bias.size() != n) {
    throw std::invalid_argument("l1_regression: bias length mismatch");
  }

  if (n == 0 || (!biased && b.isZero(0.0))) {
    // No free variable, or w = 0 already attains the 0 objective.
    result.value = b.lpNorm<1>();
    result.converged = true;
    return result;
  }

  // Variables x = (w, t); constraints G x <= h with
  //   G = [A -I; -A -I], h = (-b; b); objective c = (bias; 1).
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const double b_scale = 1.0 + b.cwiseAbs().maxCoeff();
  Eigen::VectorXd t = b.cwiseAbs().array() + 0.1 * b_scale;
  Eigen::VectorXd z1 = Eigen::VectorXd::Constant(T, 0.5);
  Eigen::VectorXd z2 = Eigen::VectorXd::Constant(T, 0.5);
  Eigen::VectorXd s1 = t - (A * w + b);  // slack of A w + b <= t
  Eigen::VectorXd s2 = t + (A * w + b);  // slack of -(A w + b) <= t

  const double eta = 0.995;
  const double c_scale =
      1.0 + (biased ? std::max(1.0, opts.w_bias.cwiseAbs().maxCoeff()) : 1.0);

  Eigen::VectorXd r = A * w + b;  // current residual vector
  double primal_obj = t.sum() + (biased ? opts.w_bias.dot(w) : 0.0);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // Residuals of the KKT system.
    Eigen::VectorXd rd_w = A.transpose() * (z1 - z2);
    if (biased) rd_w += opts.w_bias;
    Eigen::VectorXd rd_t = Eigen::VectorXd::Ones(T) - z1 - z2;
    Eigen::VectorXd rp1 = r - t + s1;
    Eigen::VectorXd rp2 = -r - t + s2;

    const double gap = s1.dot(z1) + s2.dot(z2);
    const double mu = gap / static_cast<double>(2 * T);
    const double rel_gap = gap / (1.0 + std::abs(primal_obj));
    const double dual_inf =
        std::max(rd_w.lpNorm<Eigen::Infinity>(), rd_t.lpNorm<Eigen::Infinity>());
    const double primal_inf =
        std::max(rp1.lpNorm<Eigen::Infinity>(), rp2.lpNorm<Eigen::Infinity>());

    result.iterations = iter;
    result.kkt_residual = std::max({rel_gap, dual_inf / c_scale,
                                    primal_inf / b_scale});
    if (rel_gap <= opts.rel_gap_tol &&
        dual_inf <= opts.feas_tol * c_scale &&
        primal_inf <= opts.feas_tol * b_scale) {
      result.converged = true;
      break;
    }

    const Eigen::VectorXd d1 = z1.cwiseQuotient(s1);
    const Eigen::VectorXd d2 = z2.cwiseQuotient(s2);
    const Eigen::VectorXd e = d1 + d2;
    const Eigen::VectorXd f = d2 - d1;
    const Eigen::VectorXd phi =
        4.0 * d1.cwiseProduct(d2).cwiseQuotient(e);

    Eigen::MatrixXd H = A.transpose() * phi.asDiagonal() * A;
    const double reg = 1e-13 * (1.0 + H.trace() / static_cast<double>(n));
    H.diagonal().array() += reg;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success) {
      H.diagonal().array() += 1e6 * reg;
      ldlt.compute(H);
      if (ldlt.info() != Eigen::Success) break;
    }

    // One factorization serves the predictor and the corrector.
    auto solve_newton = [&](const Eigen::VectorXd& rc1,
                            const Eigen::VectorXd& rc2, Eigen::VectorXd& dw,
                            Eigen::VectorXd& dt, Eigen::VectorXd& dz1,
                            Eigen::VectorXd& dz2, Eigen::VectorXd& ds1,
                            Eigen::VectorXd& ds2) {
      const Eigen::VectorXd q1 =
          d1.cwiseProduct(rp1) - rc1.cwiseQuotient(s1);
      const Eigen::VectorXd q2 =
          d2.cwiseProduct(rp2) - rc2.cwiseQuotient(s2);
      Eigen::VectorXd g_w = -rd_w - A.transpose() * (q1 - q2);
      Eigen::VectorXd g_t = -rd_t + q1 + q2;
      const Eigen::VectorXd rhs_w =
          g_w - A.transpose() * (f.cwiseQuotient(e).cwiseProduct(g_t));
      dw = ldlt.solve(rhs_w);
      const Eigen::VectorXd Adw = A * dw;
      dt = (g_t - f.cwiseProduct(Adw)).cwiseQuotient(e);
      dz1 = d1.cwiseProduct(Adw - dt + rp1) - rc1.cwiseQuotient(s1);
      dz2 = d2.cwiseProduct(-Adw - dt + rp2) - rc2.cwiseQuotient(s2);
      ds1 = -(rc1 + s1.cwiseProduct(dz1)).cwiseQuotient(z1);
      ds2 = -(rc2 + s2.cwiseProduct(dz2)).cwiseQuotient(z2);
    };

    Eigen::VectorXd dw, dt, dz1, dz2, ds1, ds2;

    // Predictor (affine scaling, sigma = 0).
    Eigen::VectorXd rc1 = z1.cwiseProduct(s1);
    Eigen::VectorXd rc2 = z2.cwiseProduct(s2);
    solve_newton(rc1, rc2, dw, dt, dz1, dz2, ds1, ds2);

    double ap = std::min(step_to_boundary(s1, ds1, 1.0),
                         step_to_boundary(s2, ds2, 1.0));
    double ad = std::min(step_to_boundary(z1, dz1, 1.0),
                         step_to_boundary(z2, dz2, 1.0));
    const double mu_aff =
        ((s1 + ap * ds1).dot(z1 + ad * dz1) +
         (s2 + ap * ds2).dot(z2 + ad * dz2)) /
        static_cast<double>(2 * T);
    const double ratio = std::max(mu_aff, 0.0) / mu;
    const double sigma = std::min(1.0, ratio * ratio * ratio);

    // Corrector.
    rc1 += ds1.cwiseProduct(dz1) -
           Eigen::VectorXd::Constant(T, sigma * mu);
    rc2 += ds2.cwiseProduct(dz2) -
           Eigen::VectorXd::Constant(T, sigma * mu);
    solve_newton(rc1, rc2, dw, dt, dz1, dz2, ds1, ds2);

    ap = std::min({1.0, step_to_boundary(s1, ds1, eta),
                   step_to_boundary(s2, ds2, eta)});
    ad = std::min({1.0, step_to_boundary(z1, dz1, eta),
                   step_to_boundary(z2, dz2, eta)});

    w += ap * dw;
    t += ap * dt;
    s1 += ap * ds1;
    s2 += ap * ds2;
    z1 += ad * dz1;
    z2 += ad * dz2;
    r = A * w + b;
    primal_obj = t.sum() + (biased ? opts.w_bias.dot(w) : 0.0);
  }

  result.w = w;
  result.value = r.lpNorm<1>();
  return result;
}

}  // namespace bliss::cert
