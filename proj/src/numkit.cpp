#include "bliss/numkit.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bliss::numkit {

Eigen::MatrixXd ProjectorHandle::apply(
    const Eigen::Ref<const Eigen::MatrixXd>& M) const {
  if (M.rows() != rows_) {
    throw std::invalid_argument("ProjectorHandle::apply: row mismatch");
  }
  if (basis_.cols() == 0) return M;
  return M - basis_ * (basis_.transpose() * M);
}

Eigen::MatrixXd ProjectorHandle::range_part(
    const Eigen::Ref<const Eigen::MatrixXd>& M) const {
  if (M.rows() != rows_) {
    throw std::invalid_argument("ProjectorHandle::range_part: row mismatch");
  }
  if (basis_.cols() == 0) return Eigen::MatrixXd::Zero(M.rows(), M.cols());
  return basis_ * (basis_.transpose() * M);
}

ProjectorHandle projector_complement(
    const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Eigen::Index T = X.rows();
  if (X.cols() == 0 || X.isZero(0.0)) return ProjectorHandle::identity(T);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double thresh = static_cast<double>(std::max(X.rows(), X.cols())) *
                        std::numeric_limits<double>::epsilon() * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > thresh) ++rank;
  return ProjectorHandle(T, svd.matrixU().leftCols(rank));
}

ThinSvd thin_svd_rank_m(const Eigen::Ref<const Eigen::MatrixXd>& M,
                        Eigen::Index m) {
  if (m < 1 || m > std::min(M.rows(), M.cols())) {
    throw std::invalid_argument("thin_svd_rank_m: m out of range");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double thresh = static_cast<double>(std::max(M.rows(), M.cols())) *
                        std::numeric_limits<double>::epsilon() * s(0);
  if (!(s(m - 1) > thresh)) {
    std::ostringstream msg;
    msg << "innovation rank below m: sigma_" << m << " = " << s(m - 1)
        << " <= threshold " << thresh
        << " (m misspecified or insufficient excitation)";
    throw std::runtime_error(msg.str());
  }

  ThinSvd out;
  out.Q = svd.matrixU().leftCols(m);
  out.sigma = s.head(m);
  out.V = svd.matrixV().leftCols(m);
  if (m < s.size() && s(m) > 0.0) {
    out.gap_ratio = s(m - 1) / s(m);
    out.weak_rank_gap = out.gap_ratio < 10.0;
  }
  return out;
}

Eigen::MatrixXd prox_neg_logdet(const Eigen::Ref<const Eigen::MatrixXd>& W,
                                double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("prox_neg_logdet: lambda must be positive");
  }
  if (W.rows() != W.cols()) {
    throw std::invalid_argument("prox_neg_logdet: W must be square");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = 0.5 * (s(i) + std::sqrt(s(i) * s(i) + 4.0 * lambda));
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Eigen::VectorXd project_l1(const Eigen::Ref<const Eigen::VectorXd>& v,
                           double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("project_l1: radius must be positive");
  }
  if (v.lpNorm<1>() <= radius) return v;

  // Find the soft threshold theta with sum_i max(|v_i| - theta, 0) = radius.
  Eigen::VectorXd mags = v.cwiseAbs();
  std::sort(mags.data(), mags.data() + mags.size(),
            std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < mags.size(); ++k) {
    cumulative += mags(k);
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (k + 1 == mags.size() || mags(k + 1) <= candidate) {
      theta = candidate;
      break;
    }
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double shrunk = std::abs(v(i)) - theta;
    out(i) = shrunk > 0.0 ? (v(i) > 0.0 ? shrunk : -shrunk) : 0.0;
  }
  return out;
}

Eigen::MatrixXd project_l1_columns(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                   double radius) {
  Eigen::MatrixXd out(M.rows(), M.cols());
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    out.col(j) = project_l1(M.col(j), radius);
  }
  return out;
}

double volume(const Eigen::Ref<const Eigen::MatrixXd>& B) {
  if (B.rows() < B.cols()) {
    throw std::invalid_argument("volume: requires rows >= cols");
  }
  if (B.cols() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  return svd.singularValues().prod();
}

}  // namespace bliss::numkit
