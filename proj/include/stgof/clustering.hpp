#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "stgof/common.hpp"

namespace stgof {

struct ClusterAssignment {
  std::vector<int> labels;   // cluster ids ordered by first occurrence
  Eigen::MatrixXd centers;   // m x d
  double rss = 0.0;
  int restarts_used = 0;
  bool converged = false;
};

struct KmeansOptions {
  int restarts = 20;
  int max_iter = 300;
  std::uint64_t seed = 0;
  // label vectors used as additional warm starts (e.g. ground truth in
  // simulation studies); the result is never worse than any of them
  std::vector<std::vector<int>> extra_candidates;
};

// Lloyd's algorithm with kmeans++ seeding, best of `restarts` runs.
// Nearest-center ties break toward the lowest center index; an emptied
// cluster seizes the point farthest from its current center. Deterministic
// for a fixed seed.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int m, const KmeansOptions& opt = {});

// Bottom-up pruning distances for the rows of u (K x d, K >= 2):
// d_K <= d_{K-1} <= ... <= d_2, where each step removes the larger-index row
// of the lexicographically first closest pair.
struct PruningProfile {
  std::vector<double> d_values;   // d_values[j] = d_{K-j}, i.e. d_K first
  std::vector<int> removal_order; // original row ids, in removal order

  // d_m(U) for 2 <= m <= K
  double d(int m) const { return d_values[d_values.size() - static_cast<std::size_t>(m - 1)]; }
};

PruningProfile pruning_distances(const Eigen::MatrixXd& u);

// Exact change of the two-cluster k-means objective when subset c moves from
// cluster a to cluster b:
//   |B||C|/(|B|+|C|) * ||mean_C - mean_B||^2 - |A||C|/(|A|-|C|) * ||mean_C - mean_A||^2.
// a and b must be disjoint and cover all rows of points; c must be a strict
// subset of a.
double rss_delta(const Eigen::MatrixXd& points, std::span<const int> a, std::span<const int> b,
                 std::span<const int> c);

// Non-splitting check: every true community must land inside a single
// estimated cluster (merging communities is fine, splitting is not).
struct NspReport {
  bool ok = true;
  struct Violation {
    int community = 0;
    int community_size = 0;
    std::vector<int> clusters;  // estimated clusters the community was split across
  };
  std::vector<Violation> violations;
};

NspReport nsp_check(const std::vector<int>& estimated, const std::vector<int>& truth);

}  // namespace stgof
