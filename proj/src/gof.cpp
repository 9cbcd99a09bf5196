#include "stgof/gof.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stgof {

namespace {

int cluster_count(const std::vector<int>& labels) {
  int m = 0;
  for (int l : labels) {
    if (l < 0) throw ContractError("refit: negative label");
    m = std::max(m, l + 1);
  }
  return m;
}

// Shared closed-form refit given degrees, per-cluster degree sums and the
// m x m block sums of the (possibly weighted) adjacency.
RefitModel refit_from_sums(const std::vector<int>& labels, int m, const Eigen::VectorXd& deg,
                           const Eigen::VectorXd& row_sums, const Eigen::MatrixXd& block_sums,
                           std::vector<std::vector<int>> clusters) {
  for (int k = 0; k < m; ++k) {
    if (clusters[k].empty())
      throw RefitError("refit: cluster " + std::to_string(k) + " is empty");
    if (!(row_sums[k] > 0))
      throw RefitError("refit: cluster " + std::to_string(k) + " has zero degree sum");
    if (!(block_sums(k, k) > 0))
      throw RefitError("refit: cluster " + std::to_string(k) + " has no internal edges");
  }

  RefitModel fit;
  fit.m = m;
  fit.labels = labels;
  fit.clusters = std::move(clusters);

  const int n = static_cast<int>(labels.size());
  fit.theta_hat.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = labels[i];
    fit.theta_hat[i] = deg[i] / row_sums[k] * std::sqrt(block_sums(k, k));
  }

  fit.p_hat.resize(m, m);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      fit.p_hat(k, l) = block_sums(k, l) / std::sqrt(block_sums(k, k) * block_sums(l, l));
  for (int k = 0; k < m; ++k) {
    if (std::abs(fit.p_hat(k, k) - 1.0) > 1e-12)
      throw Error("refit: unit diagonal identity violated");
    fit.p_hat(k, k) = 1.0;
  }

  fit.theta_norm = fit.theta_hat.norm();
  fit.theta_l1 = fit.theta_hat.lpNorm<1>();
  fit.g_hat = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd h2 = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    fit.g_hat[labels[i]] += fit.theta_hat[i];
    h2[labels[i]] += fit.theta_hat[i] * fit.theta_hat[i];
  }
  fit.g_hat /= fit.theta_l1;
  fit.h_hat = (h2 / (fit.theta_norm * fit.theta_norm)).cwiseSqrt();
  fit.v_hat = fit.p_hat * fit.g_hat;
  return fit;
}

}  // namespace

RefitModel refit(const AdjacencyMatrix& a, const std::vector<int>& labels) {
  const int n = a.node_count();
  if (static_cast<int>(labels.size()) != n) throw ContractError("refit: label length mismatch");
  const int m = cluster_count(labels);

  std::vector<std::vector<int>> clusters(m);
  for (int i = 0; i < n; ++i) clusters[labels[i]].push_back(i);

  Eigen::VectorXd deg(n);
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd block_sums = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < n; ++i) {
    deg[i] = a.degree(i);
    row_sums[labels[i]] += deg[i];
    for (int j : a.neighbors(i)) block_sums(labels[i], labels[j]) += 1.0;
  }
  return refit_from_sums(labels, m, deg, row_sums, block_sums, std::move(clusters));
}

RefitModel refit_weighted(const Eigen::MatrixXd& w, const std::vector<int>& labels) {
  const int n = static_cast<int>(w.rows());
  if (static_cast<int>(labels.size()) != n)
    throw ContractError("refit_weighted: label length mismatch");
  const int m = cluster_count(labels);

  std::vector<std::vector<int>> clusters(m);
  for (int i = 0; i < n; ++i) clusters[labels[i]].push_back(i);

  const Eigen::VectorXd deg = w.rowwise().sum();
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd block_sums = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < n; ++i) {
    row_sums[labels[i]] += deg[i];
    for (int j = 0; j < n; ++j) block_sums(labels[i], labels[j]) += w(i, j);
  }
  return refit_from_sums(labels, m, deg, row_sums, block_sums, std::move(clusters));
}

std::int64_t quadrilateral_count(const AdjacencyMatrix& a) {
  const int n = a.node_count();
  std::int64_t tr4 = 0;
  std::int64_t sum_d2 = 0;
  std::vector<std::int64_t> paths(n, 0);  // (A^2) column, reused
  std::vector<int> touched;
  for (int i = 0; i < n; ++i) {
    sum_d2 += static_cast<std::int64_t>(a.degree(i)) * a.degree(i);
    touched.clear();
    for (int j : a.neighbors(i)) {
      for (int k : a.neighbors(j)) {
        if (paths[k] == 0) touched.push_back(k);
        ++paths[k];
      }
    }
    for (int k : touched) {
      tr4 += paths[k] * paths[k];
      paths[k] = 0;
    }
  }
  return tr4 - 2 * sum_d2 + 2 * a.edge_count();
}

double q_statistic(const AdjacencyMatrix& a, const RefitModel& fit) {
  const int n = a.node_count();
  if (static_cast<int>(fit.labels.size()) != n)
    throw ContractError("q_statistic: refit dimension mismatch");
  const int m = fit.m;

  // R v = A v - Theta Pi P Pi' Theta v + diag(theta^2) v, so one column of R
  // or R^2 costs O(deg + n m) without forming anything dense.
  const auto residual_times = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < n; ++j) s[fit.labels[j]] += fit.theta_hat[j] * v[j];
    const Eigen::VectorXd t = fit.p_hat * s;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j : a.neighbors(i)) acc += v[j];
      out[i] = acc - fit.theta_hat[i] * t[fit.labels[i]] +
               fit.theta_hat[i] * fit.theta_hat[i] * v[i];
    }
  };

  double tr4 = 0.0, diag_sq = 0.0, fourth = 0.0;
  Eigen::VectorXd col(n), col2(n);
  for (int i = 0; i < n; ++i) {
    // column i of R
    const Eigen::VectorXd ti = fit.theta_hat[i] * fit.p_hat.col(fit.labels[i]);
    for (int j = 0; j < n; ++j) col[j] = -fit.theta_hat[j] * ti[fit.labels[j]];
    for (int j : a.neighbors(i)) col[j] += 1.0;
    col[i] = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e2 = col[j] * col[j];
      fourth += e2 * e2;
    }
    residual_times(col, col2);
    tr4 += col2.squaredNorm();
    diag_sq += col2[i] * col2[i];
  }
  return tr4 - 2.0 * diag_sq + fourth;
}

double bias_correction(const RefitModel& fit) {
  for (int k = 0; k < fit.m; ++k) {
    if (!(fit.v_hat[k] > 0))
      throw Error("bias_correction: zero diagonal in V (empty effective cluster " +
                  std::to_string(k) + ")");
  }
  const Eigen::MatrixXd ph2p =
      fit.p_hat * fit.h_hat.cwiseAbs2().asDiagonal() * fit.p_hat;
  const Eigen::VectorXd w = fit.g_hat.cwiseQuotient(fit.v_hat);
  const double quad = w.dot(ph2p.cwiseProduct(ph2p) * w);
  const double norm2 = fit.theta_norm * fit.theta_norm;
  return 2.0 * norm2 * norm2 * quad;
}

GofStatistics psi_statistic(const AdjacencyMatrix& a, const std::vector<int>& labels) {
  GofStatistics stats;
  stats.c = quadrilateral_count(a);
  if (stats.c <= 0) throw Error("psi_statistic: graph has no quadrilaterals; statistic undefined");
  const RefitModel fit = refit(a, labels);
  stats.q = q_statistic(a, fit);
  stats.b = bias_correction(fit);
  stats.psi = (stats.q - stats.b) / std::sqrt(8.0 * static_cast<double>(stats.c));
  return stats;
}

}  // namespace stgof
