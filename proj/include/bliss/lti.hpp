#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

namespace bliss::lti {

enum class Distribution { Gaussian, Laplace };

std::string to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

/// Ground-truth pair (A, B); n >= m and B has full column rank.
struct SystemRealization {
  Eigen::MatrixXd A;  // n x n state transition
  Eigen::MatrixXd B;  // n x m input map
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  int retries = 0;  // degenerate draws resampled during generation
};

struct SparseInputSpec {
  int s = 1;  // nonzeros per time step
  Distribution distribution = Distribution::Gaussian;
  Eigen::Index T = 0;
  std::uint64_t seed = 0;
  double scale = 1.0;  // nonzero magnitude scale (Gaussian sigma / Laplace b)
};

struct TrajectoryMeta {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index T = 0;
  int s = 0;
  std::uint64_t seed = 0;
  Distribution distribution = Distribution::Gaussian;
  double spectral_radius = 0.0;
  double input_scale = 1.0;
};

/// Matrix form of one trajectory: X holds rows x(0)..x(T-1), Xplus holds
/// columns x(1)..x(T), so Xplus = A X^T + B U^T exactly on noiseless data.
struct TrajectoryData {
  Eigen::MatrixXd X;      // T x n
  Eigen::MatrixXd Xplus;  // n x T
  std::optional<Eigen::MatrixXd> U_true;  // T x m
  TrajectoryMeta meta;
};

/// A = c G with G i.i.d. standard normal and c set so the spectral radius
/// of A (largest |eigenvalue|) equals the request; B i.i.d. standard normal.
/// Degenerate draws (near-nilpotent G, rank-deficient B) are resampled with
/// a perturbed seed and counted in SystemRealization::retries.
SystemRealization generate_system(Eigen::Index n, Eigen::Index m,
                                  double spectral_radius, std::uint64_t seed);

/// T x m input matrix whose row t has exactly spec.s nonzeros, support drawn
/// uniformly without replacement, magnitudes i.i.d. from spec.distribution.
Eigen::MatrixXd generate_sparse_inputs(const SparseInputSpec& spec,
                                       Eigen::Index m);

/// Rolls the recurrence x(k+1) = A x(k) + B u(k) forward from x0 and
/// assembles the matrices. Throws on non-finite states, naming the step.
TrajectoryData simulate(const SystemRealization& sys,
                        const Eigen::Ref<const Eigen::MatrixXd>& U,
                        const Eigen::Ref<const Eigen::VectorXd>& x0);

/// simulate from x0 = 0.
TrajectoryData simulate(const SystemRealization& sys,
                        const Eigen::Ref<const Eigen::MatrixXd>& U);

struct PersistencyReport {
  Eigen::Index rank = 0;
  bool persistently_exciting = false;
  double threshold = 0.0;  // the sigma cutoff used for the numerical rank
  std::string reason;      // empty when persistently exciting
};

/// Numerical rank of [X, U]; persistently exciting iff it equals n + m.
PersistencyReport persistency_rank(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::MatrixXd>& U);

double spectral_radius_of(const Eigen::Ref<const Eigen::MatrixXd>& A);

}  // namespace bliss::lti
