#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stgof/clustering.hpp"
#include "stgof/gof.hpp"
#include "stgof/graph.hpp"
#include "stgof/spectral.hpp"

namespace stgof {

// Upper-alpha quantile of N(0,1), i.e. z with P(Z >= z) = alpha. Rational
// initial guess refined by one Newton step through erfc; accurate to well
// below 1e-8 over alpha in (1e-300, 1 - 1e-16).
double normal_upper_quantile(double alpha);

struct StgofConfig {
  double alpha = 0.05;
  int k_max = 15;
  EigenOptions eigen;       // seed field is ignored; streams derive from `seed`
  int kmeans_restarts = 20;
  int kmeans_max_iter = 300;
  enum class Fallback { Error, ArgminPsi } fallback = Fallback::ArgminPsi;
  std::uint64_t seed = 1;
};

enum class Decision { Continue, Accept, Error };

struct BootstrapNull {
  int m = 0;
  int n_replicates = 0;
  double u_hat = 0.0;      // empirical mean of the replicate Q statistics
  double sigma_hat = 0.0;  // empirical (sample) standard deviation
  std::vector<double> q_values;
};

struct StepRecord {
  int m = 0;
  std::vector<int> labels;
  GofStatistics stats;
  bool has_stats = false;
  Decision decision = Decision::Continue;
  std::string error;
  // bootstrap recalibration, when running the empirical-null variant
  bool has_star = false;
  double psi_star = 0.0;
  double u_hat = 0.0;
  double sigma_hat = 0.0;
};

struct StgofResult {
  enum class Termination { Acceptance, KmaxExhausted, Error };
  std::optional<int> k_hat;
  std::vector<StepRecord> steps;
  Termination terminated_by = Termination::Error;
  std::optional<int> argmin_suggestion;  // m minimizing the deciding statistic
  bool restricted_to_giant = false;
  int working_n = 0;
  double z_alpha = 0.0;
  std::string error;
  double total_ms = 0.0;
};

// Stepwise estimator: for m = 1, 2, ..., k_max cluster with SCORE at m,
// refit, and stop at the first m whose standardized statistic falls below
// z_alpha. Steps whose refit fails count as rejections. Disconnected input is
// restricted to its largest component (flagged in the result).
StgofResult estimate_k(const AdjacencyMatrix& a, const StgofConfig& config);

// Empirical null for step m: subtract the rank-m spectral fit from A, permute
// the residual, truncate to [0,1], resample Bernoulli graphs (retrying up to
// 50 times for connectivity), and push each through the step-m pipeline.
// Throws Error after 50 disconnected draws or if the replicate sd vanishes.
BootstrapNull bootstrap_null(const AdjacencyMatrix& a, int m, int n_replicates,
                             std::uint64_t seed, const EigenPairs& eigens,
                             const StgofConfig& config);

// Stepwise loop identical to estimate_k but thresholding the
// bootstrap-standardized statistic (Q - u_hat) / sigma_hat against z_alpha.
StgofResult estimate_k_star(const AdjacencyMatrix& a, const StgofConfig& config,
                            int n_replicates);

std::string result_to_json(const StgofResult& result, const StgofConfig& config);

}  // namespace stgof
