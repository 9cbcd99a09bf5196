#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stgof/graph.hpp"

namespace stgof {

// DCBM refitted on a working m-cluster assignment. The refitted expected
// adjacency is kept in factored form (theta_hat, labels, P_hat): entry (i,j)
// is theta_hat_i * theta_hat_j * P_hat(c_i, c_j) and is never materialized as
// an n x n matrix on the main path.
struct RefitModel {
  int m = 0;
  std::vector<int> labels;
  std::vector<std::vector<int>> clusters;
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd p_hat;    // unit diagonal, exactly
  Eigen::VectorXd g_hat;    // cluster shares of ||theta_hat||_1, sums to 1
  Eigen::VectorXd h_hat;    // cluster shares of ||theta_hat|| (root of squared share)
  Eigen::VectorXd v_hat;    // diag(P_hat * g_hat)
  double theta_norm = 0.0;
  double theta_l1 = 0.0;

  double omega(int i, int j) const {
    return theta_hat[i] * theta_hat[j] * p_hat(labels[i], labels[j]);
  }
};

// Closed-form refit of (theta, P) from the block sums of A under the given
// labels. Throws RefitError (naming the cluster) when a cluster is empty or a
// required block/row sum vanishes.
RefitModel refit(const AdjacencyMatrix& a, const std::vector<int>& labels);

// Same algebra on a dense symmetric nonnegative matrix with row sums playing
// the role of degrees (diagonal included). Exists so the exact-recovery
// identities can be exercised on expected adjacency matrices.
RefitModel refit_weighted(const Eigen::MatrixXd& w, const std::vector<int>& labels);

// Number of ordered 4-cycles on distinct vertices:
//   C = tr(A^4) - 2 * sum_i d_i^2 + 2m,
// evaluated with sparse products only.
std::int64_t quadrilateral_count(const AdjacencyMatrix& a);

// Sum over ordered distinct 4-tuples of the product of residuals
// (A - omega_hat) around the cycle. Uses the zero-diagonal trace identity
//   Q = tr(R^4) - 2 * sum_i (R^2)_ii^2 + sum_{i != j} R_ij^4
// with R = A - omega_hat (diagonal zeroed), evaluated column by column
// through the sparse + rank-m split of R.
double q_statistic(const AdjacencyMatrix& a, const RefitModel& fit);

// Null-mean estimate 2||theta_hat||^4 * g' V^-1 (PH^2P o PH^2P) V^-1 g.
double bias_correction(const RefitModel& fit);

struct GofStatistics {
  double q = 0.0;
  double b = 0.0;
  std::int64_t c = 0;
  double psi = 0.0;  // (q - b) / sqrt(8c)
};

// Refit + all three ingredients. Throws Error when the graph has no
// quadrilaterals (statistic undefined), RefitError as above.
GofStatistics psi_statistic(const AdjacencyMatrix& a, const std::vector<int>& labels);

}  // namespace stgof
