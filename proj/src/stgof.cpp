#include "stgof/stgof.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "stgof/dcbm.hpp"
#include "stgof/rng.hpp"

namespace stgof {

namespace {

// Acklam's rational approximation to the standard normal quantile
// (relative error < 1.2e-9), followed by one Newton step through erfc.
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley refinement: F(x) - p has derivative phi(x)
  constexpr double sqrt_two_pi = 2.506628274631000502;
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * sqrt_two_pi * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

// Runs the step-m community detection on a connected graph.
std::vector<int> score_labels(const AdjacencyMatrix& a, int m, const EigenPairs& eigens,
                              const StgofConfig& config) {
  if (m == 1) return std::vector<int>(a.node_count(), 0);
  const RatioMatrix ratios = score_ratio_matrix(eigens, m, default_ratio_clip(a.node_count()));
  KmeansOptions km;
  km.restarts = config.kmeans_restarts;
  km.max_iter = config.kmeans_max_iter;
  km.seed = splitmix64(config.seed + 0x6b6d) + static_cast<std::uint64_t>(m);
  return kmeans(ratios.r, m, km).labels;
}

struct StepwiseHooks {
  // Returns the deciding statistic for step m and fills the record.
  // Throws stgof::Error subclasses on per-step failures.
  virtual double deciding_statistic(const AdjacencyMatrix& a, int m, const EigenPairs& eigens,
                                    StepRecord& rec) = 0;
  virtual ~StepwiseHooks() = default;
};

StgofResult run_stepwise(const AdjacencyMatrix& input, const StgofConfig& config,
                         StepwiseHooks& hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  StgofResult result;
  result.z_alpha = normal_upper_quantile(config.alpha);

  AdjacencyMatrix giant;
  const AdjacencyMatrix* work = &input;
  if (!is_connected(input)) {
    giant = largest_component(input).graph;
    work = &giant;
    result.restricted_to_giant = true;
  }
  result.working_n = work->node_count();

  const int depth = std::min(config.k_max, work->node_count() - 1);
  if (depth < 1) {
    result.error = "graph too small for any working dimension";
    result.terminated_by = StgofResult::Termination::Error;
    return result;
  }

  EigenPairs eigens;
  try {
    EigenOptions opt = config.eigen;
    opt.seed = splitmix64(config.seed + 0xe1);
    // the shared decomposition goes to depth k_max, which can reach into the
    // noise bulk where gaps are slim; give it headroom unless the caller
    // already pinned a budget
    if (opt.max_iter == 0) opt.max_iter = 50 * work->node_count();
    eigens = top_eigenpairs(*work, depth, opt);
  } catch (const Error& e) {
    result.error = std::string("eigensolver: ") + e.what();
    result.terminated_by = StgofResult::Termination::Error;
    return result;
  }

  double best_stat = std::numeric_limits<double>::infinity();
  result.terminated_by = StgofResult::Termination::KmaxExhausted;
  for (int m = 1; m <= depth; ++m) {
    StepRecord rec;
    rec.m = m;
    double stat = std::numeric_limits<double>::quiet_NaN();
    try {
      rec.labels = score_labels(*work, m, eigens, config);
      stat = hooks.deciding_statistic(*work, m, eigens, rec);
    } catch (const Error& e) {
      // a step that cannot be refitted (or bootstrapped) has not passed the
      // goodness-of-fit gate: record and move on
      rec.decision = Decision::Error;
      rec.error = e.what();
      result.steps.push_back(std::move(rec));
      continue;
    }
    if (stat < best_stat) {
      best_stat = stat;
      result.argmin_suggestion = m;
    }
    if (stat < result.z_alpha) {
      rec.decision = Decision::Accept;
      result.steps.push_back(std::move(rec));
      result.k_hat = m;
      result.terminated_by = StgofResult::Termination::Acceptance;
      break;
    }
    rec.decision = Decision::Continue;
    result.steps.push_back(std::move(rec));
  }

  if (result.terminated_by == StgofResult::Termination::KmaxExhausted &&
      config.fallback == StgofConfig::Fallback::ArgminPsi) {
    result.k_hat = result.argmin_suggestion;
  }
  result.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
  return result;
}

Eigen::MatrixXd dense_adjacency(const AdjacencyMatrix& a) {
  const int n = a.node_count();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : a.neighbors(i)) d(i, j) = 1.0;
  return d;
}

}  // namespace

double normal_upper_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ContractError("normal_upper_quantile: alpha must lie in (0,1)");
  return -inverse_normal_cdf(alpha);
}

StgofResult estimate_k(const AdjacencyMatrix& a, const StgofConfig& config) {
  struct PlainHooks : StepwiseHooks {
    double deciding_statistic(const AdjacencyMatrix& work, int /*m*/, const EigenPairs&,
                              StepRecord& rec) override {
      rec.stats = psi_statistic(work, rec.labels);
      rec.has_stats = true;
      return rec.stats.psi;
    }
  } hooks;
  return run_stepwise(a, config, hooks);
}

BootstrapNull bootstrap_null(const AdjacencyMatrix& a, int m, int n_replicates,
                             std::uint64_t seed, const EigenPairs& eigens,
                             const StgofConfig& config) {
  if (m < 1) throw ContractError("bootstrap_null: m must be >= 1");
  if (n_replicates < 2) throw ContractError("bootstrap_null: need at least 2 replicates");
  if (eigens.count() < m) throw ContractError("bootstrap_null: not enough eigenpairs");

  const int n = a.node_count();
  Eigen::MatrixXd low_rank = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < m; ++k)
    low_rank += eigens.lambdas[k] * eigens.vectors.col(k) * eigens.vectors.col(k).transpose();
  const Eigen::MatrixXd resid = dense_adjacency(a) - low_rank;

  BootstrapNull out;
  out.m = m;
  out.n_replicates = n_replicates;
  out.q_values.resize(n_replicates);

  for (int b = 0; b < n_replicates; ++b) {
    Rng rng(seed, (static_cast<std::uint64_t>(m) << 32) | static_cast<std::uint64_t>(b));
    const std::vector<int> perm = rng.permutation(n);
    Eigen::MatrixXd omega(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        omega(i, j) = std::clamp(low_rank(i, j) + resid(perm[i], perm[j]), 0.0, 1.0);
    // symmetrize: the permuted residual keeps A's symmetry, but guard rounding
    omega = 0.5 * (omega + omega.transpose()).eval();

    AdjacencyMatrix sample;
    bool connected = false;
    for (int attempt = 0; attempt < 50 && !connected; ++attempt) {
      sample = sample_adjacency(omega, rng);
      connected = is_connected(sample);
    }
    if (!connected)
      throw Error("bootstrap_null: 50 disconnected draws at m=" + std::to_string(m) +
                  " (degenerate low-rank fit)");

    std::vector<int> labels;
    if (m == 1) {
      labels.assign(sample.node_count(), 0);
    } else {
      EigenOptions opt = config.eigen;
      opt.seed = splitmix64(seed + 0xb00 + b);
      const EigenPairs pairs = top_eigenpairs(sample, m, opt);
      const RatioMatrix ratios = score_ratio_matrix(pairs, m, default_ratio_clip(n));
      KmeansOptions km;
      km.restarts = config.kmeans_restarts;
      km.max_iter = config.kmeans_max_iter;
      km.seed = splitmix64(seed + 0x6b6d00 + b) + static_cast<std::uint64_t>(m);
      labels = kmeans(ratios.r, m, km).labels;
    }
    const RefitModel fit = refit(sample, labels);
    out.q_values[b] = q_statistic(sample, fit);
  }

  double mean = 0.0;
  for (double q : out.q_values) mean += q;
  mean /= n_replicates;
  double var = 0.0;
  for (double q : out.q_values) var += (q - mean) * (q - mean);
  var /= (n_replicates - 1);
  out.u_hat = mean;
  out.sigma_hat = std::sqrt(var);
  if (!(out.sigma_hat > 0))
    throw Error("bootstrap_null: replicate statistics are degenerate (sd = 0)");
  return out;
}

StgofResult estimate_k_star(const AdjacencyMatrix& a, const StgofConfig& config,
                            int n_replicates) {
  struct StarHooks : StepwiseHooks {
    const StgofConfig* config = nullptr;
    int n_replicates = 0;
    double deciding_statistic(const AdjacencyMatrix& work, int m, const EigenPairs& eigens,
                              StepRecord& rec) override {
      rec.stats = psi_statistic(work, rec.labels);
      rec.has_stats = true;
      const BootstrapNull null =
          bootstrap_null(work, m, n_replicates, config->seed, eigens, *config);
      rec.has_star = true;
      rec.u_hat = null.u_hat;
      rec.sigma_hat = null.sigma_hat;
      rec.psi_star = (rec.stats.q - null.u_hat) / null.sigma_hat;
      return rec.psi_star;
    }
  } hooks;
  hooks.config = &config;
  hooks.n_replicates = n_replicates;
  return run_stepwise(a, config, hooks);
}

std::string result_to_json(const StgofResult& result, const StgofConfig& config) {
  nlohmann::json j;
  j["k_hat"] = result.k_hat.has_value() ? nlohmann::json(*result.k_hat) : nlohmann::json();
  j["alpha"] = config.alpha;
  j["z_alpha"] = result.z_alpha;
  j["seed"] = config.seed;
  j["k_max"] = config.k_max;
  switch (result.terminated_by) {
    case StgofResult::Termination::Acceptance: j["terminated_by"] = "acceptance"; break;
    case StgofResult::Termination::KmaxExhausted: j["terminated_by"] = "k_max"; break;
    case StgofResult::Termination::Error: j["terminated_by"] = "error"; break;
  }
  if (result.argmin_suggestion) j["argmin_suggestion"] = *result.argmin_suggestion;
  j["restricted_to_giant"] = result.restricted_to_giant;
  j["working_n"] = result.working_n;
  if (!result.error.empty()) j["error"] = result.error;
  j["timings"] = {{"total_ms", result.total_ms}};
  j["steps"] = nlohmann::json::array();
  for (const auto& step : result.steps) {
    nlohmann::json s;
    s["m"] = step.m;
    switch (step.decision) {
      case Decision::Continue: s["decision"] = "continue"; break;
      case Decision::Accept: s["decision"] = "accept"; break;
      case Decision::Error: s["decision"] = "error"; break;
    }
    if (step.has_stats) {
      s["psi"] = step.stats.psi;
      s["Q"] = step.stats.q;
      s["B"] = step.stats.b;
      s["C"] = step.stats.c;
    }
    if (step.has_star) {
      s["psi_star"] = step.psi_star;
      s["u_hat"] = step.u_hat;
      s["sigma_hat"] = step.sigma_hat;
    }
    if (!step.error.empty()) s["error"] = step.error;
    j["steps"].push_back(std::move(s));
  }
  return j.dump(2);
}

}  // namespace stgof
