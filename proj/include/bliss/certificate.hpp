#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bliss/l1lp.hpp"

namespace bliss::cert {

/// l1 column-normalized data (X tilde, U tilde) with the original column
/// norms retained; the fundamental zonotope is [Xt, Ut]^T B_inf.
struct NormalizedPair {
  Eigen::MatrixXd Xt;       // T x n, unit l1 columns (n may be 0)
  Eigen::MatrixXd Ut;       // T x m, unit l1 columns
  Eigen::VectorXd x_norms;  // original ||X_i||_1
  Eigen::VectorXd u_norms;  // original ||U_i||_1 (omega)
};

/// Throws when a column is exactly zero, naming the offending index.
NormalizedPair normalize_pair(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const Eigen::Ref<const Eigen::MatrixXd>& U);

/// sigma_Z(w, v) = ||Xt w + Ut v||_1, the support function of the zonotope.
double support_function(const NormalizedPair& np,
                        const Eigen::Ref<const Eigen::VectorXd>& w,
                        const Eigen::Ref<const Eigen::VectorXd>& v);

struct OmegaResult {
  double value = 0.0;
  Eigen::VectorXd w_star;
  double kkt_residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Omega(v) = inf_w sigma_Z(w, v), the gauge driving the scattering
/// conditions, evaluated exactly (up to LP tolerance) as an l1 regression.
OmegaResult omega(const NormalizedPair& np,
                  const Eigen::Ref<const Eigen::VectorXd>& v);

/// Same LP with a tiny random linear term on w; used to probe minimizer
/// uniqueness for condition 3.
OmegaResult omega_perturbed(const NormalizedPair& np,
                            const Eigen::Ref<const Eigen::VectorXd>& v,
                            std::uint64_t seed);

enum class Verdict { CertifiedSampled, Refuted, Inconclusive };

std::string to_string(Verdict v);

struct C3Entry {
  double omega_value = 0.0;
  double w_norm = 0.0;            // ||w*||_2 of the plain LP
  double w_norm_perturbed = 0.0;  // after the tie-break probe
  double kkt_residual = 0.0;
  bool pass = false;
};

struct PairwiseProbe {
  int i = 0;
  int j = 0;
  int sign = 1;  // direction (e_i + sign * e_j) / sqrt(2)
  double omega_value = 0.0;
  double margin = 0.0;  // omega - 1
};

struct CertifyOptions {
  int num_samples = 1000;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int jobs = 0;                 // 0: hardware concurrency
  bool pairwise_probes = true;  // deterministic 2-sparse directions for C2
};

struct CertificateReport {
  // C1: Omega(v) >= ||v||_2 over sampled unit-sphere directions.
  double c1_min_margin = 0.0;
  int c1_argmin_index = -1;
  bool c1_pass = false;

  // C2: strict gap for clearly non-sparse samples; basis directions at 1;
  // optional deterministic two-sparse probes.
  double c2_sparse_gap = 0.0;
  int c2_num_nonsparse = 0;
  double c2_basis_max_dev = 0.0;
  double c2_pairwise_min_margin = std::numeric_limits<double>::infinity();
  std::vector<PairwiseProbe> c2_violations;
  bool c2_pass = false;

  // C3: per basis vector, Omega(e_i) = 1 attained only at w = 0.
  std::vector<C3Entry> c3_results;
  bool c3_pass = false;

  int num_samples = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  int lp_failures = 0;
  Verdict overall = Verdict::Inconclusive;
  std::vector<std::string> notes;
};

CertificateReport check_persistent_scattering(const NormalizedPair& np,
                                              const CertifyOptions& opts);

/// Spec-shaped convenience overload.
CertificateReport check_persistent_scattering(const NormalizedPair& np,
                                              int num_samples,
                                              std::uint64_t seed, double tol);

}  // namespace bliss::cert
