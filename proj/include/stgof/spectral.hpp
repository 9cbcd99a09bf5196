#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "stgof/graph.hpp"

namespace stgof {

struct EigenOptions {
  double tol = 1e-8;
  int max_iter = 0;   // 0 -> 10 * n
  int oversample = 8; // extra block columns; improves rates near the noise bulk
  int rr_period = 5;  // Rayleigh-Ritz / convergence check cadence
  std::uint64_t seed = 1;
};

// Leading eigenpairs of a symmetric matrix, ordered by decreasing |lambda|.
// Column 0 is the Perron vector, sign-fixed so its entries sum positive;
// remaining columns have their largest-magnitude entry positive, so repeated
// runs are deterministic up to solver tolerance.
struct EigenPairs {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd vectors;  // n x m, orthonormal columns
  Eigen::VectorXd residuals;
  bool near_degenerate = false;    // |lambda_m| close to |lambda_{m+1}|
  bool perron_flagged = false;     // first eigenvector had entries < -1e-10
  bool input_disconnected = false;

  int count() const { return static_cast<int>(lambdas.size()); }
};

// Block power iteration with Rayleigh-Ritz extraction and locking of
// converged pairs. Throws ConvergenceError (with achieved residuals) if the
// first m pairs do not reach tol * max(1, |lambda|) within max_iter sweeps.
EigenPairs top_eigenpairs(const AdjacencyMatrix& a, int m, const EigenOptions& opt = {});

// Same solver on a dense symmetric matrix; used for noise-free runs on
// expected adjacency matrices.
EigenPairs top_eigenpairs_dense(const Eigen::MatrixXd& sym, int m, const EigenOptions& opt = {});

struct RatioMatrix {
  Eigen::MatrixXd r;  // n x (m-1)
  double clip = 0.0;
};

// SCORE ratios r(i,k) = xi_{k+1}(i) / xi_1(i), clipped to [-clip, clip].
// Entries with |xi_1(i)| below the denominator guard become
// sign(xi_{k+1}(i)) * clip. Requires m >= 2.
RatioMatrix score_ratio_matrix(const EigenPairs& pairs, int m, double clip);

inline double default_ratio_clip(int n) { return std::log(static_cast<double>(n)); }

}  // namespace stgof
