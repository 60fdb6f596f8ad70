#include "bliss/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bliss/rng.hpp"

namespace bliss::lti {

std::string to_string(Distribution d) {
  return d == Distribution::Gaussian ? "gaussian" : "laplace";
}

Distribution distribution_from_string(const std::string& name) {
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "laplace") return Distribution::Laplace;
  throw std::invalid_argument("unknown distribution: " + name);
}

double spectral_radius_of(const Eigen::Ref<const Eigen::MatrixXd>& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      M(i, j) = normal(gen);
    }
  }
  return M;
}

double laplace_sample(double scale, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (;;) {
    const double u = uniform(gen) - 0.5;
    const double t = 1.0 - 2.0 * std::abs(u);
    if (t <= 0.0) continue;
    const double x = -scale * (u < 0.0 ? -1.0 : 1.0) * std::log(t);
    if (x != 0.0) return x;
  }
}

}  // namespace

SystemRealization generate_system(Eigen::Index n, Eigen::Index m,
                                  double spectral_radius, std::uint64_t seed) {
  if (n < m || m < 1) {
    throw std::invalid_argument("generate_system: requires n >= m >= 1");
  }
  if (!(spectral_radius > 0.0)) {
    throw std::invalid_argument(
        "generate_system: spectral radius must be positive");
  }

  SystemRealization sys;
  sys.n = n;
  sys.m = m;

  std::uint64_t draw_seed = seed;
  constexpr int kMaxRetries = 64;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    auto gen = rng::engine(rng::derive(draw_seed, 0x5e5eULL));
    Eigen::MatrixXd G = standard_normal(n, n, gen);
    Eigen::MatrixXd B = standard_normal(n, m, gen);

    const double rho_g = spectral_radius_of(G);
    const double sigma_min_b =
        Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues().minCoeff();
    const double tiny = 1e-12 * std::sqrt(static_cast<double>(n));
    if (rho_g <= tiny || sigma_min_b <= tiny) {
      draw_seed = rng::derive(draw_seed, 0xdeadULL + attempt);
      sys.retries += 1;
      continue;
    }

    sys.A = (spectral_radius / rho_g) * G;
    sys.B = std::move(B);
    return sys;
  }
  throw std::runtime_error(
      "generate_system: could not draw a non-degenerate system");
}

Eigen::MatrixXd generate_sparse_inputs(const SparseInputSpec& spec,
                                       Eigen::Index m) {
  if (spec.s < 1 || spec.s > m) {
    throw std::invalid_argument(
        "generate_sparse_inputs: requires 1 <= s <= m");
  }
  if (spec.T < 1) {
    throw std::invalid_argument("generate_sparse_inputs: T must be >= 1");
  }

  auto gen = rng::engine(rng::derive(spec.seed, 0x1275ULL));
  std::normal_distribution<double> normal(0.0, spec.scale);

  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(spec.T, m);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);

  for (Eigen::Index t = 0; t < spec.T; ++t) {
    // Partial Fisher-Yates: the first s entries of idx become the support.
    for (int k = 0; k < spec.s; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, m - 1);
      std::swap(idx[static_cast<std::size_t>(k)],
                idx[static_cast<std::size_t>(pick(gen))]);
      double value = 0.0;
      do {
        value = spec.distribution == Distribution::Gaussian
                    ? normal(gen)
                    : laplace_sample(spec.scale, gen);
      } while (value == 0.0);
      U(t, idx[static_cast<std::size_t>(k)]) = value;
    }
  }
  return U;
}

TrajectoryData simulate(const SystemRealization& sys,
                        const Eigen::Ref<const Eigen::MatrixXd>& U,
                        const Eigen::Ref<const Eigen::VectorXd>& x0) {
  const Eigen::Index T = U.rows();
  if (U.cols() != sys.m || x0.size() != sys.n) {
    throw std::invalid_argument("simulate: shape mismatch");
  }

  TrajectoryData traj;
  traj.X.resize(T, sys.n);
  traj.Xplus.resize(sys.n, T);

  Eigen::VectorXd x = x0;
  for (Eigen::Index t = 0; t < T; ++t) {
    traj.X.row(t) = x.transpose();
    x = sys.A * x + sys.B * U.row(t).transpose();
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "simulate: non-finite state at step " << t + 1
          << " (unstable blow-up)";
      throw std::runtime_error(msg.str());
    }
    traj.Xplus.col(t) = x;
  }

  traj.U_true = U;
  traj.meta.n = sys.n;
  traj.meta.m = sys.m;
  traj.meta.T = T;
  return traj;
}

TrajectoryData simulate(const SystemRealization& sys,
                        const Eigen::Ref<const Eigen::MatrixXd>& U) {
  return simulate(sys, U, Eigen::VectorXd::Zero(sys.n));
}

PersistencyReport persistency_rank(
    const Eigen::Ref<const Eigen::MatrixXd>& X,
    const Eigen::Ref<const Eigen::MatrixXd>& U) {
  if (X.rows() != U.rows()) {
    throw std::invalid_argument("persistency_rank: row count mismatch");
  }
  const Eigen::Index T = X.rows();
  const Eigen::Index cols = X.cols() + U.cols();

  Eigen::MatrixXd J(T, cols);
  J << X, U;

  PersistencyReport report;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(J);
  const Eigen::VectorXd& s = svd.singularValues();
  const double sigma_max = s.size() > 0 ? s(0) : 0.0;
  report.threshold = static_cast<double>(std::max(T, cols)) *
                     std::numeric_limits<double>::epsilon() * sigma_max;
  while (report.rank < s.size() && s(report.rank) > report.threshold) {
    ++report.rank;
  }
  report.persistently_exciting = report.rank == cols;
  if (T < cols) {
    report.persistently_exciting = false;
    report.reason = "insufficient samples";
  } else if (!report.persistently_exciting) {
    report.reason = "rank deficient";
  }
  return report;
}

}  // namespace bliss::lti
