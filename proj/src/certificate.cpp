#include "bliss/certificate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bliss/rng.hpp"

namespace bliss::cert {

NormalizedPair normalize_pair(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const Eigen::Ref<const Eigen::MatrixXd>& U) {
  if (X.cols() > 0 && X.rows() != U.rows()) {
    throw std::invalid_argument("normalize_pair: row count mismatch");
  }
  NormalizedPair np;
  np.Xt.resize(U.rows(), X.cols());
  np.Ut.resize(U.rows(), U.cols());
  np.x_norms.resize(X.cols());
  np.u_norms.resize(U.cols());

  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    const double norm = X.col(i).lpNorm<1>();
    if (norm == 0.0) {
      std::ostringstream msg;
      msg << "normalize_pair: state column " << i
          << " is zero (degenerate direction)";
      throw std::invalid_argument(msg.str());
    }
    np.x_norms(i) = norm;
    np.Xt.col(i) = X.col(i) / norm;
  }
  for (Eigen::Index i = 0; i < U.cols(); ++i) {
    const double norm = U.col(i).lpNorm<1>();
    if (norm == 0.0) {
      std::ostringstream msg;
      msg << "normalize_pair: input column " << i
          << " is zero (degenerate direction)";
      throw std::invalid_argument(msg.str());
    }
    np.u_norms(i) = norm;
    np.Ut.col(i) = U.col(i) / norm;
  }
  return np;
}

double support_function(const NormalizedPair& np,
                        const Eigen::Ref<const Eigen::VectorXd>& w,
                        const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (w.size() != np.Xt.cols() || v.size() != np.Ut.cols()) {
    throw std::invalid_argument("support_function: shape mismatch");
  }
  Eigen::VectorXd combo = np.Ut * v;
  if (np.Xt.cols() > 0) combo += np.Xt * w;
  return combo.lpNorm<1>();
}

OmegaResult omega(const NormalizedPair& np,
                  const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != np.Ut.cols()) {
    throw std::invalid_argument("omega: v length mismatch");
  }
  const L1RegressionResult lp = l1_regression(np.Xt, np.Ut * v);
  return {lp.value, lp.w, lp.kkt_residual, lp.converged, lp.iterations};
}

OmegaResult omega_perturbed(const NormalizedPair& np,
                            const Eigen::Ref<const Eigen::VectorXd>& v,
                            std::uint64_t seed) {
  const Eigen::Index n = np.Xt.cols();
  L1RegressionOptions opts;
  if (n > 0) {
    auto gen = rng::engine(rng::derive(seed, 0x7e57ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd bias(n);
    for (Eigen::Index i = 0; i < n; ++i) bias(i) = normal(gen);
    bias.normalize();
    opts.w_bias = 1e-7 * bias;
  }
  const L1RegressionResult lp = l1_regression(np.Xt, np.Ut * v, opts);
  return {lp.value, lp.w, lp.kkt_residual, lp.converged, lp.iterations};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedSampled:
      return "certified-sampled";
    case Verdict::Refuted:
      return "refuted";
    default:
      return "inconclusive";
  }
}

namespace {

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

CertificateReport check_persistent_scattering(const NormalizedPair& np,
                                              const CertifyOptions& opts) {
  if (opts.num_samples < 1) {
    throw std::invalid_argument("check_persistent_scattering: need samples");
  }
  const Eigen::Index m = np.Ut.cols();
  const Eigen::Index n = np.Xt.cols();

  CertificateReport report;
  report.num_samples = opts.num_samples;
  report.tol = opts.tol;
  report.seed = opts.seed;
  report.notes.push_back(
      "C1/C2 are sampled, never a proof; C3 uniqueness is approximated by "
      "the minimizer norm plus a perturbed tie-break re-solve");

  // Sample directions first so results are independent of scheduling.
  auto gen = rng::engine(rng::derive(opts.seed, 0xce27ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(opts.num_samples));
  for (int k = 0; k < opts.num_samples; ++k) {
    Eigen::VectorXd v(m);
    do {
      for (Eigen::Index i = 0; i < m; ++i) v(i) = normal(gen);
    } while (v.norm() == 0.0);
    v /= v.norm();
    samples.push_back(std::move(v));
  }

  struct SampleOutcome {
    double margin = 0.0;
    bool nonsparse = false;
    bool converged = false;
  };
  std::vector<SampleOutcome> outcomes(samples.size());
  const double nonsparse_cutoff = 0.1 / std::sqrt(static_cast<double>(m));

  parallel_for(static_cast<int>(samples.size()), opts.jobs, [&](int k) {
    const Eigen::VectorXd& v = samples[static_cast<std::size_t>(k)];
    const OmegaResult res = omega(np, v);
    auto& out = outcomes[static_cast<std::size_t>(k)];
    out.margin = res.value - 1.0;  // samples are unit norm
    out.nonsparse = v.cwiseAbs().minCoeff() > nonsparse_cutoff;
    out.converged = res.converged;
  });

  bool c1_violated = false;
  report.c1_min_margin = std::numeric_limits<double>::infinity();
  report.c2_sparse_gap = std::numeric_limits<double>::infinity();
  bool c2_sampled_violated = false;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& out = outcomes[k];
    if (!out.converged) {
      report.lp_failures += 1;
      continue;
    }
    if (out.margin < report.c1_min_margin) {
      report.c1_min_margin = out.margin;
      report.c1_argmin_index = static_cast<int>(k);
    }
    if (out.margin < -opts.tol) c1_violated = true;
    if (out.nonsparse) {
      report.c2_num_nonsparse += 1;
      report.c2_sparse_gap = std::min(report.c2_sparse_gap, out.margin);
      if (out.margin <= opts.tol) c2_sampled_violated = true;
    }
  }
  report.c1_pass = !c1_violated;

  // C2 exact part: every +-e_i must sit on the sphere (Omega = 1).
  bool basis_violated = false;
  std::vector<double> basis_dev(static_cast<std::size_t>(2 * m), 0.0);
  std::vector<bool> basis_ok(static_cast<std::size_t>(2 * m), false);
  parallel_for(static_cast<int>(2 * m), opts.jobs, [&](int k) {
    const Eigen::Index i = k / 2;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v(i) = sign;
    const OmegaResult res = omega(np, v);
    basis_dev[static_cast<std::size_t>(k)] = std::abs(res.value - 1.0);
    basis_ok[static_cast<std::size_t>(k)] = res.converged;
  });
  report.c2_basis_max_dev = 0.0;
  for (std::size_t k = 0; k < basis_dev.size(); ++k) {
    if (!basis_ok[k]) {
      report.lp_failures += 1;
      continue;
    }
    report.c2_basis_max_dev = std::max(report.c2_basis_max_dev, basis_dev[k]);
    if (basis_dev[k] > opts.tol) basis_violated = true;
  }

  // Deterministic two-sparse probes (e_i +- e_j)/sqrt(2): condition 2 demands
  // a strict gap there, and duplicated input directions surface immediately.
  bool pairwise_violated = false;
  if (opts.pairwise_probes && m >= 2) {
    std::vector<PairwiseProbe> probes;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        for (int sign : {1, -1}) {
          probes.push_back({i, j, sign, 0.0, 0.0});
        }
      }
    }
    std::vector<bool> ok(probes.size(), false);
    parallel_for(static_cast<int>(probes.size()), opts.jobs, [&](int k) {
      auto& probe = probes[static_cast<std::size_t>(k)];
      Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
      const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
      v(probe.i) = inv_sqrt2;
      v(probe.j) = probe.sign * inv_sqrt2;
      const OmegaResult res = omega(np, v);
      probe.omega_value = res.value;
      probe.margin = res.value - 1.0;
      ok[static_cast<std::size_t>(k)] = res.converged;
    });
    for (std::size_t k = 0; k < probes.size(); ++k) {
      if (!ok[k]) {
        report.lp_failures += 1;
        continue;
      }
      report.c2_pairwise_min_margin =
          std::min(report.c2_pairwise_min_margin, probes[k].margin);
      if (probes[k].margin <= opts.tol) {
        pairwise_violated = true;
        report.c2_violations.push_back(probes[k]);
      }
    }
  }
  report.c2_pass = !c2_sampled_violated && !basis_violated &&
                   !pairwise_violated;

  // C3, exact per basis vector. The near-zero-minimizer check is an
  // approximation of the uniqueness implication; the interior-point LP
  // returns the analytic center of the optimal face, so a flat face shows
  // up as a large ||w*||.
  report.c3_results.resize(static_cast<std::size_t>(m));
  std::vector<bool> c3_lp_ok(static_cast<std::size_t>(m), false);
  parallel_for(static_cast<int>(m), opts.jobs, [&](int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v(i) = 1.0;
    const OmegaResult plain = omega(np, v);
    const OmegaResult probed =
        omega_perturbed(np, v, rng::derive(opts.seed, 0xc3ULL, i));
    auto& entry = report.c3_results[static_cast<std::size_t>(i)];
    entry.omega_value = plain.value;
    entry.kkt_residual = plain.kkt_residual;
    entry.w_norm = n > 0 ? plain.w_star.norm() : 0.0;
    entry.w_norm_perturbed = n > 0 ? probed.w_star.norm() : 0.0;
    c3_lp_ok[static_cast<std::size_t>(i)] = plain.converged && probed.converged;
    const double w_cap = opts.tol * static_cast<double>(std::max<Eigen::Index>(n, 1));
    entry.pass = plain.converged && probed.converged &&
                 std::abs(entry.omega_value - 1.0) <= opts.tol &&
                 entry.w_norm <= w_cap && entry.w_norm_perturbed <= w_cap;
  });
  bool c3_violated = false;
  for (std::size_t i = 0; i < report.c3_results.size(); ++i) {
    if (!c3_lp_ok[i]) {
      report.lp_failures += 1;
      continue;
    }
    if (!report.c3_results[i].pass) c3_violated = true;
  }
  report.c3_pass = std::all_of(report.c3_results.begin(),
                               report.c3_results.end(),
                               [](const C3Entry& e) { return e.pass; });

  const bool refuted = c1_violated || c2_sampled_violated || basis_violated ||
                       pairwise_violated || c3_violated;
  if (refuted) {
    report.overall = Verdict::Refuted;
  } else if (report.lp_failures > 0) {
    report.overall = Verdict::Inconclusive;
  } else {
    report.overall = Verdict::CertifiedSampled;
  }
  return report;
}

CertificateReport check_persistent_scattering(const NormalizedPair& np,
                                              int num_samples,
                                              std::uint64_t seed, double tol) {
  CertifyOptions opts;
  opts.num_samples = num_samples;
  opts.seed = seed;
  opts.tol = tol;
  return check_persistent_scattering(np, opts);
}

}  // namespace bliss::cert
