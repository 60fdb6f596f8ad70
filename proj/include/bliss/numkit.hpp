#pragma once

#include <Eigen/Dense>
#include <limits>

namespace bliss::numkit {

/// Orthogonal projector onto img(X)^perp, stored as the orthonormal range
/// basis Q of X so that apply(M) = M - Q (Q^T M). A T x T matrix is never
/// formed. A rank-0 handle (empty basis) acts as the identity projector.
class ProjectorHandle {
 public:
  ProjectorHandle() = default;

  ProjectorHandle(Eigen::Index rows, Eigen::MatrixXd basis)
      : rows_(rows), basis_(std::move(basis)) {}

  /// Identity projector on a T-dimensional space (empty range).
  static ProjectorHandle identity(Eigen::Index rows) {
    return ProjectorHandle(rows, Eigen::MatrixXd(rows, 0));
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index rank() const { return basis_.cols(); }
  const Eigen::MatrixXd& range_basis() const { return basis_; }

  /// (I - X X^+) M
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& M) const;

  /// X X^+ M, the complementary part so that apply(M) + range_part(M) = M.
  Eigen::MatrixXd range_part(const Eigen::Ref<const Eigen::MatrixXd>& M) const;

 private:
  Eigen::Index rows_ = 0;
  Eigen::MatrixXd basis_;  // rows_ x rank, orthonormal columns
};

/// Builds the projector onto img(X)^perp from an SVD of X. Rank is decided
/// by the max(T, n) * eps * sigma_max threshold; X = 0 yields the identity.
ProjectorHandle projector_complement(const Eigen::Ref<const Eigen::MatrixXd>& X);

struct ThinSvd {
  Eigen::MatrixXd Q;      // n x m, orthonormal columns
  Eigen::VectorXd sigma;  // m positive values, nonincreasing
  Eigen::MatrixXd V;      // T x m, orthonormal columns
  bool weak_rank_gap = false;
  // sigma(m-1) / sigma(m); +inf when M has no singular value beyond the m-th
  double gap_ratio = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd reconstruct() const {
    return Q * sigma.asDiagonal() * V.transpose();
  }
};

/// Top-m factors of M. Throws std::runtime_error when the m-th singular
/// value falls below the numerical-rank threshold (the innovation does not
/// have rank m). weak_rank_gap flags sigma_m / sigma_{m+1} < 10; it is a
/// diagnostic, never fatal.
ThinSvd thin_svd_rank_m(const Eigen::Ref<const Eigen::MatrixXd>& M,
                        Eigen::Index m);

/// prox of lambda * (-log|det .|) at W, evaluated through an SVD of W:
///   1/2 * U_W (Sigma_W + sqrt(Sigma_W^2 + 4 lambda I)) V_W^T.
/// The output always satisfies sigma_min >= sqrt(lambda) and the
/// stationarity identity Phi - W = lambda * Phi^{-T}.
Eigen::MatrixXd prox_neg_logdet(const Eigen::Ref<const Eigen::MatrixXd>& W,
                                double lambda);

/// Euclidean projection of a single vector onto {v : ||v||_1 <= radius}.
/// Sort-based, exact in finitely many operations.
Eigen::VectorXd project_l1(const Eigen::Ref<const Eigen::VectorXd>& v,
                           double radius);

/// Column-wise l1-ball projection; interior columns are returned unchanged.
Eigen::MatrixXd project_l1_columns(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                   double radius);

/// vol(B) = sqrt(det(B^T B)) = product of the singular values of B.
/// Requires rows >= cols; rank-deficient B gives 0.
double volume(const Eigen::Ref<const Eigen::MatrixXd>& B);

}  // namespace bliss::numkit
