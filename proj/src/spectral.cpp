#include "stgof/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stgof/rng.hpp"

namespace stgof {

namespace {

constexpr double kPerronSnap = 1e-10;
constexpr double kDenominatorGuard = 1e-12;

// Fix signs in place: column 0 sums positive, later columns have their
// largest-|entry| positive.
void canonicalize_signs(Eigen::MatrixXd& x) {
  for (int k = 0; k < x.cols(); ++k) {
    double pivot = 0.0;
    if (k == 0) {
      pivot = x.col(0).sum();
      if (pivot == 0.0) {
        for (int i = 0; i < x.rows(); ++i) {
          if (x(i, 0) != 0.0) {
            pivot = x(i, 0);
            break;
          }
        }
      }
    } else {
      int imax = 0;
      x.col(k).cwiseAbs().maxCoeff(&imax);
      pivot = x(imax, k);
    }
    if (pivot < 0) x.col(k) = -x.col(k);
  }
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& x) {
  return Eigen::HouseholderQR<Eigen::MatrixXd>(x).householderQ() *
         Eigen::MatrixXd::Identity(x.rows(), x.cols());
}

// MatVec: void(const double* x, double* y), y = A x.
template <class MatVec>
EigenPairs solve_top_pairs(int n, MatVec&& av, int m, const EigenOptions& opt) {
  if (m < 1 || m > n - 1) throw ContractError("top_eigenpairs: need 1 <= m <= n-1");
  const int max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * n;
  const int block = std::min(n, m + std::max(1, opt.oversample));

  auto apply_block = [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    out.resize(n, in.cols());
    for (int j = 0; j < in.cols(); ++j) av(in.col(j).data(), out.col(j).data());
  };

  Rng rng(opt.seed, /*stream=*/0xe16e);
  Eigen::MatrixXd q(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) q(i, j) = rng.uniform(-1.0, 1.0);
  q = thin_q(q);

  // locked leading Ritz pairs (converged, frozen)
  Eigen::MatrixXd locked_vecs(n, 0);
  Eigen::VectorXd locked_vals(0), locked_res(0);

  Eigen::MatrixXd z, ritz_vecs;
  Eigen::VectorXd ritz_vals, ritz_res;

  const auto rayleigh_ritz = [&]() {
    Eigen::MatrixXd aq;
    apply_block(q, aq);
    Eigen::MatrixXd small = q.transpose() * aq;
    small = 0.5 * (small + small.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    const int r = static_cast<int>(small.rows());
    std::vector<int> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      const double ax = std::abs(es.eigenvalues()[x]), ay = std::abs(es.eigenvalues()[y]);
      if (ax != ay) return ax > ay;
      return es.eigenvalues()[x] > es.eigenvalues()[y];
    });
    ritz_vals.resize(r);
    ritz_vecs.resize(n, r);
    for (int j = 0; j < r; ++j) {
      ritz_vals[j] = es.eigenvalues()[order[j]];
      ritz_vecs.col(j) = q * es.eigenvectors().col(order[j]);
    }
    Eigen::MatrixXd arv;
    apply_block(ritz_vecs, arv);
    ritz_res.resize(r);
    for (int j = 0; j < r; ++j)
      ritz_res[j] = (arv.col(j) - ritz_vals[j] * ritz_vecs.col(j)).norm();
  };

  int iter = 0;
  bool done = false;
  while (!done) {
    for (int step = 0; step < opt.rr_period && iter < max_iter; ++step, ++iter) {
      apply_block(q, z);
      if (locked_vecs.cols() > 0) z -= locked_vecs * (locked_vecs.transpose() * z);
      q = thin_q(z);
    }

    rayleigh_ritz();

    const int avail = static_cast<int>(ritz_vals.size());
    int lock = 0;
    while (lock < avail && ritz_res[lock] <= opt.tol * std::max(1.0, std::abs(ritz_vals[lock])))
      ++lock;
    const int want = m - static_cast<int>(locked_vals.size());
    if (lock >= want) {
      done = true;
      // keep one extra pair when available so the degeneracy check below has
      // an estimate of |lambda_{m+1}|
      lock = std::min(avail, want + 1);
    }
    if (lock > 0) {
      const int old = static_cast<int>(locked_vals.size());
      locked_vecs.conservativeResize(n, old + lock);
      locked_vals.conservativeResize(old + lock);
      locked_res.conservativeResize(old + lock);
      for (int j = 0; j < lock; ++j) {
        locked_vecs.col(old + j) = ritz_vecs.col(j);
        locked_vals[old + j] = ritz_vals[j];
        locked_res[old + j] = ritz_res[j];
      }
      if (!done) {
        Eigen::MatrixXd rest = ritz_vecs.rightCols(avail - lock);
        rest -= locked_vecs * (locked_vecs.transpose() * rest);
        q = thin_q(rest);
      }
    } else if (!done) {
      q = ritz_vecs;  // restart from the Ritz basis
    }

    if (!done && iter >= max_iter) {
      std::vector<double> achieved(ritz_res.data(), ritz_res.data() + ritz_res.size());
      throw ConvergenceError(
          "top_eigenpairs: no convergence after " + std::to_string(max_iter) + " iterations",
          achieved);
    }
  }

  EigenPairs out;
  out.lambdas = locked_vals.head(m);
  out.vectors = locked_vecs.leftCols(m);
  out.residuals = locked_res.head(m);
  if (locked_vals.size() > m) {
    const double am = std::abs(locked_vals[m - 1]), am1 = std::abs(locked_vals[m]);
    out.near_degenerate = (am - am1) <= 1e-3 * std::max(1.0, am);
  }

  canonicalize_signs(out.vectors);

  // Perron cleanup on the leading vector
  const double min_entry = out.vectors.col(0).minCoeff();
  if (min_entry < -kPerronSnap) out.perron_flagged = true;
  if (min_entry < 0) {
    for (int i = 0; i < n; ++i) {
      double& v = out.vectors(i, 0);
      if (v < 0 && v >= -kPerronSnap) v = 0.0;
    }
    out.vectors.col(0).normalize();
  }
  return out;
}

}  // namespace

EigenPairs top_eigenpairs(const AdjacencyMatrix& a, int m, const EigenOptions& opt) {
  auto av = [&a](const double* x, double* y) { a.multiply(x, y); };
  EigenPairs pairs = solve_top_pairs(a.node_count(), av, m, opt);
  pairs.input_disconnected = !is_connected(a);
  return pairs;
}

EigenPairs top_eigenpairs_dense(const Eigen::MatrixXd& sym, int m, const EigenOptions& opt) {
  const int n = static_cast<int>(sym.rows());
  auto av = [&sym, n](const double* x, double* y) {
    Eigen::Map<const Eigen::VectorXd> xm(x, n);
    Eigen::Map<Eigen::VectorXd> ym(y, n);
    ym.noalias() = sym * xm;
  };
  return solve_top_pairs(n, av, m, opt);
}

RatioMatrix score_ratio_matrix(const EigenPairs& pairs, int m, double clip) {
  if (m < 2) throw ContractError("score_ratio_matrix: m must be >= 2 (m=1 needs no ratios)");
  if (pairs.count() < m) throw ContractError("score_ratio_matrix: not enough eigenpairs");
  if (!(clip > 0)) throw ContractError("score_ratio_matrix: clip threshold must be positive");

  const int n = static_cast<int>(pairs.vectors.rows());
  RatioMatrix out;
  out.clip = clip;
  out.r.resize(n, m - 1);
  for (int i = 0; i < n; ++i) {
    const double denom = pairs.vectors(i, 0);
    for (int k = 1; k < m; ++k) {
      const double num = pairs.vectors(i, k);
      double val;
      if (std::abs(denom) < kDenominatorGuard) {
        val = (num > 0 ? clip : (num < 0 ? -clip : 0.0));
      } else {
        val = num / denom;
      }
      out.r(i, k - 1) = std::clamp(val, -clip, clip);
    }
  }
  return out;
}

}  // namespace stgof
