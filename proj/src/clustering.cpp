#include "stgof/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "stgof/rng.hpp"

namespace stgof {

namespace {

double sq_dist(const Eigen::MatrixXd& x, int i, const Eigen::MatrixXd& centers, int k) {
  return (x.row(i) - centers.row(k)).squaredNorm();
}

int nearest_center(const Eigen::MatrixXd& x, int i, const Eigen::MatrixXd& centers) {
  int best = 0;
  double best_d = sq_dist(x, i, centers, 0);
  for (int k = 1; k < centers.rows(); ++k) {
    const double d = sq_dist(x, i, centers, k);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = k;
    }
  }
  return best;
}

Eigen::MatrixXd kmeanspp_centers(const Eigen::MatrixXd& x, int m, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd centers(m, x.cols());
  centers.row(0) = x.row(static_cast<int>(rng.below(n)));
  Eigen::VectorXd d2(n);
  for (int i = 0; i < n; ++i) d2[i] = (x.row(i) - centers.row(0)).squaredNorm();
  for (int k = 1; k < m; ++k) {
    const double total = d2.sum();
    int pick;
    if (total <= 0) {
      pick = static_cast<int>(rng.below(n));
    } else {
      double u = rng.uniform01() * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        u -= d2[i];
        if (u < 0) {
          pick = i;
          break;
        }
      }
    }
    centers.row(k) = x.row(pick);
    for (int i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (x.row(i) - centers.row(k)).squaredNorm());
  }
  return centers;
}

struct LloydResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;
  double rss = std::numeric_limits<double>::infinity();
  bool converged = false;
};

void update_centers(const Eigen::MatrixXd& x, const std::vector<int>& labels, int m,
                    Eigen::MatrixXd& centers) {
  centers.setZero(m, x.cols());
  std::vector<int> count(m, 0);
  for (int i = 0; i < x.rows(); ++i) {
    centers.row(labels[i]) += x.row(i);
    ++count[labels[i]];
  }
  for (int k = 0; k < m; ++k) {
    if (count[k] > 0) centers.row(k) /= count[k];
  }
}

double total_rss(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                 const Eigen::MatrixXd& centers) {
  double s = 0.0;
  for (int i = 0; i < x.rows(); ++i) s += sq_dist(x, i, centers, labels[i]);
  return s;
}

LloydResult lloyd(const Eigen::MatrixXd& x, int m, Eigen::MatrixXd centers, int max_iter) {
  const int n = static_cast<int>(x.rows());
  LloydResult res;
  res.labels.assign(n, -1);
  std::vector<int> count(m);
  double prev_rss = std::numeric_limits<double>::infinity();

  for (int it = 0; it < std::max(1, max_iter); ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int k = nearest_center(x, i, centers);
      if (k != res.labels[i]) {
        res.labels[i] = k;
        changed = true;
      }
    }
    if (!changed) {
      res.converged = true;
      break;
    }
    std::fill(count.begin(), count.end(), 0);
    for (int i = 0; i < n; ++i) ++count[res.labels[i]];

    // empty-cluster repair: seize the point farthest from its own center
    for (int k = 0; k < m; ++k) {
      if (count[k] > 0) continue;
      int far = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (count[res.labels[i]] < 2) continue;
        const double d = sq_dist(x, i, centers, res.labels[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) throw ContractError("kmeans: cannot repair empty cluster");
      --count[res.labels[far]];
      res.labels[far] = k;
      count[k] = 1;
    }

    update_centers(x, res.labels, m, centers);
    const double rss = total_rss(x, res.labels, centers);
    // Lloyd's objective never increases; anything beyond rounding noise is a bug
    if (rss > prev_rss + 1e-9 * std::max(1.0, prev_rss))
      throw Error("kmeans: objective increased within a restart");
    prev_rss = rss;
  }
  res.centers = std::move(centers);
  res.rss = prev_rss;
  return res;
}

Eigen::MatrixXd centers_from_labels(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                    int m) {
  Eigen::MatrixXd centers;
  update_centers(x, labels, m, centers);
  return centers;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int m, const KmeansOptions& opt) {
  const int n = static_cast<int>(points.rows());
  if (m < 1) throw ContractError("kmeans: m must be >= 1");
  if (n < m) throw ContractError("kmeans: fewer points than clusters");

  LloydResult best;
  int used = 0;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(opt.seed, static_cast<std::uint64_t>(r));
    LloydResult cur = lloyd(points, m, kmeanspp_centers(points, m, rng), opt.max_iter);
    ++used;
    if (cur.rss < best.rss) best = std::move(cur);
  }
  // on tiny two-cluster instances the kmeans++ basins can all miss the
  // optimum; seeding from every distinct point pair is cheap and exhaustive
  if (m == 2 && n * (n - 1) / 2 <= 64) {
    Eigen::MatrixXd centers(2, points.cols());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        centers.row(0) = points.row(i);
        centers.row(1) = points.row(j);
        LloydResult cur = lloyd(points, 2, centers, opt.max_iter);
        ++used;
        if (cur.rss < best.rss) best = std::move(cur);
      }
    }
  }
  for (const auto& cand : opt.extra_candidates) {
    if (static_cast<int>(cand.size()) != n) throw ContractError("kmeans: bad candidate length");
    LloydResult cur = lloyd(points, m, centers_from_labels(points, cand, m), opt.max_iter);
    ++used;
    if (cur.rss < best.rss) best = std::move(cur);
  }

  // canonicalize ids by first occurrence
  std::vector<int> remap(m, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (remap[best.labels[i]] < 0) remap[best.labels[i]] = next++;
  }
  ClusterAssignment out;
  out.labels.resize(n);
  out.centers.resize(m, points.cols());
  for (int i = 0; i < n; ++i) out.labels[i] = remap[best.labels[i]];
  for (int k = 0; k < m; ++k) {
    if (remap[k] >= 0) out.centers.row(remap[k]) = best.centers.row(k);
  }
  out.rss = total_rss(points, out.labels, out.centers);
  out.restarts_used = used;
  out.converged = best.converged;
  return out;
}

PruningProfile pruning_distances(const Eigen::MatrixXd& u) {
  const int k = static_cast<int>(u.rows());
  if (k < 2) throw ContractError("pruning_distances: need at least two rows");

  std::vector<int> active(k);
  for (int i = 0; i < k; ++i) active[i] = i;

  PruningProfile out;
  while (active.size() >= 2) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bj = 1;
    for (std::size_t i = 0; i + 1 < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double d = (u.row(active[i]) - u.row(active[j])).norm();
        if (d < best) {  // strict: ties keep the lexicographically first pair
          best = d;
          bj = j;
        }
      }
    }
    out.d_values.push_back(best);
    if (active.size() == 2) break;
    out.removal_order.push_back(active[bj]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return out;
}

double rss_delta(const Eigen::MatrixXd& points, std::span<const int> a, std::span<const int> b,
                 std::span<const int> c) {
  const int n = static_cast<int>(points.rows());
  std::vector<char> in_a(n, 0), in_b(n, 0);
  for (int i : a) in_a[i] = 1;
  for (int i : b) {
    if (in_a[i]) throw ContractError("rss_delta: clusters must be disjoint");
    in_b[i] = 1;
  }
  if (a.size() + b.size() != static_cast<std::size_t>(n))
    throw ContractError("rss_delta: clusters must cover all points");
  for (int i : c) {
    if (!in_a[i]) throw ContractError("rss_delta: moved subset must lie inside the first cluster");
  }
  if (c.size() == a.size())
    throw ContractError("rss_delta: moved subset must be a strict subset");
  if (c.empty()) return 0.0;

  const auto mean_of = [&](std::span<const int> idx) {
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(points.cols());
    for (int i : idx) mu += points.row(i);
    return (mu / static_cast<double>(idx.size())).eval();
  };
  const auto mu_a = mean_of(a), mu_b = mean_of(b), mu_c = mean_of(c);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double nc = static_cast<double>(c.size());
  return nb * nc / (nb + nc) * (mu_c - mu_b).squaredNorm() -
         na * nc / (na - nc) * (mu_c - mu_a).squaredNorm();
}

NspReport nsp_check(const std::vector<int>& estimated, const std::vector<int>& truth) {
  if (estimated.size() != truth.size()) throw ContractError("nsp_check: length mismatch");
  std::map<int, std::set<int>> clusters_of;
  std::map<int, int> sizes;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    clusters_of[truth[i]].insert(estimated[i]);
    ++sizes[truth[i]];
  }
  NspReport report;
  for (const auto& [community, clusters] : clusters_of) {
    if (clusters.size() > 1) {
      report.ok = false;
      report.violations.push_back(
          {community, sizes[community], std::vector<int>(clusters.begin(), clusters.end())});
    }
  }
  return report;
}

}  // namespace stgof
