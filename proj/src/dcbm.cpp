#include "stgof/dcbm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace stgof {

namespace {

constexpr double kClipCeiling = 1.0 - 1e-9;

std::string pair_name(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// eigen-decomposition of a small symmetric matrix with |.|-descending order
// and canonical column signs
void small_sym_eig(const Eigen::MatrixXd& sym, Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const int k = static_cast<int>(sym.rows());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const double ax = std::abs(es.eigenvalues()[x]), ay = std::abs(es.eigenvalues()[y]);
    if (ax != ay) return ax > ay;
    return es.eigenvalues()[x] > es.eigenvalues()[y];
  });
  vals.resize(k);
  vecs.resize(k, k);
  for (int j = 0; j < k; ++j) {
    vals[j] = es.eigenvalues()[order[j]];
    vecs.col(j) = es.eigenvectors().col(order[j]);
    int imax = 0;
    vecs.col(j).cwiseAbs().maxCoeff(&imax);
    if (vecs(imax, j) < 0) vecs.col(j) = -vecs.col(j);
  }
}

}  // namespace

void DcbmParams::validate(double min_singular_value) const {
  const int nn = n(), kk = k();
  if (nn < 1) throw ContractError("DcbmParams: empty theta");
  if (kk < 1) throw ContractError("DcbmParams: empty P");
  if (static_cast<int>(labels.size()) != nn) throw ContractError("DcbmParams: label length");
  for (int i = 0; i < nn; ++i) {
    if (!(theta[i] > 0)) throw ContractError("DcbmParams: theta must be positive");
    if (labels[i] < 0 || labels[i] >= kk) throw ContractError("DcbmParams: label out of range");
  }
  if (p.rows() != p.cols()) throw ContractError("DcbmParams: P not square");
  for (int a = 0; a < kk; ++a) {
    if (std::abs(p(a, a) - 1.0) > 1e-12) throw ContractError("DcbmParams: diag(P) must be 1");
    for (int b = 0; b < kk; ++b) {
      if (p(a, b) < 0) throw ContractError("DcbmParams: P must be nonnegative");
      if (std::abs(p(a, b) - p(b, a)) > 1e-12) throw ContractError("DcbmParams: P not symmetric");
    }
  }
  if (min_singular_value > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(p);
    if (svd.singularValues().minCoeff() <= min_singular_value)
      throw ContractError("DcbmParams: P is singular (or nearly so)");
  }
  // omega < 1 off the diagonal; the largest entry uses the two largest thetas
  // within each block pair, so a full scan is the simplest correct check
  for (int i = 0; i < nn; ++i) {
    for (int j = i + 1; j < nn; ++j) {
      const double w = theta[i] * theta[j] * p(labels[i], labels[j]);
      if (w >= 1.0)
        throw ContractError("DcbmParams: omega entry >= 1 at " + pair_name(i, j) +
                            "; rescale theta");
    }
  }
}

void SimulationConfig::validate() const {
  if (n < 2) throw ContractError("SimulationConfig: n must be >= 2");
  if (k < 1) throw ContractError("SimulationConfig: K must be >= 1");
  if (!(beta_n > 0)) throw ContractError("SimulationConfig: beta_n must be positive");
  if (p_pattern != PPattern::Custom && !(b_n > 0.0 && b_n < 1.0))
    throw ContractError("SimulationConfig: b_n must lie in (0,1)");
  if (static_cast<int>(pi_weights.size()) != k)
    throw ContractError("SimulationConfig: pi weights must have K entries");
  double total = 0.0;
  for (double w : pi_weights) {
    if (w < 0) throw ContractError("SimulationConfig: pi weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ContractError("SimulationConfig: pi weights must sum to 1");
  if (p_pattern == PPattern::Custom &&
      (p_custom.rows() != k || p_custom.cols() != k))
    throw ContractError("SimulationConfig: custom P must be K x K");
  if (variant.mode == MembershipVariant::Mode::Outlier &&
      (variant.outlier_fraction < 0 || variant.outlier_fraction >= 1))
    throw ContractError("SimulationConfig: outlier fraction must lie in [0,1)");
  if (variant.mode == MembershipVariant::Mode::Mixed &&
      (variant.dirichlet_weight < 0 || variant.dirichlet_weight > 1))
    throw ContractError("SimulationConfig: dirichlet weight must lie in [0,1]");
  if (replicates < 0) throw ContractError("SimulationConfig: negative replicate count");
}

Eigen::MatrixXd build_p_matrix(PPattern pattern, int k, double b_n,
                               const Eigen::MatrixXd* custom) {
  Eigen::MatrixXd p(k, k);
  switch (pattern) {
    case PPattern::Toeplitz:
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          p(a, b) = (a == b) ? 1.0 : 1.0 - (1.0 - b_n) * (std::abs(a - b) + 1) / k;
      break;
    case PPattern::LinearOffdiag:
      if (k < 2) throw ContractError("linear-offdiag pattern needs K >= 2");
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) p(a, b) = 1.0 - std::abs(a - b) * (1.0 - b_n) / (k - 1);
      break;
    case PPattern::ConstantOffdiag:
      p.setConstant(b_n);
      p.diagonal().setOnes();
      break;
    case PPattern::Custom:
      if (!custom) throw ContractError("custom P pattern without a matrix");
      p = *custom;
      break;
  }
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      if (p(a, b) < 0)
        throw ContractError("P pattern produced a negative entry; b_n too small for K");
  return p;
}

Eigen::VectorXd sample_theta(const SimulationConfig& config, Rng& rng) {
  const int n = config.n;
  Eigen::VectorXd t(n);
  switch (config.theta.kind) {
    case ThetaLaw::Kind::Uniform:
      for (int i = 0; i < n; ++i) t[i] = rng.uniform(config.theta.a, config.theta.b);
      break;
    case ThetaLaw::Kind::Pareto:
      // inverse CDF: scale * u^{-1/shape}
      for (int i = 0; i < n; ++i)
        t[i] = config.theta.scale * std::pow(1.0 - rng.uniform01(), -1.0 / config.theta.shape);
      break;
    case ThetaLaw::Kind::TwoPoint:
      for (int i = 0; i < n; ++i)
        t[i] = rng.bernoulli(config.theta.p) ? config.theta.a : config.theta.b;
      break;
  }
  for (int i = 0; i < n; ++i) {
    if (!(t[i] > 0)) throw Error("sample_theta: nonpositive draw (law misconfigured)");
  }
  return config.beta_n / t.norm() * t;
}

std::vector<int> sample_labels(const std::vector<double>& weights, int n, Rng& rng) {
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = rng.categorical(weights);
  return labels;
}

Eigen::MatrixXd build_omega(const DcbmParams& params) {
  const int n = params.n();
  Eigen::MatrixXd omega(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double w = params.theta[i] * params.theta[j] * params.p(params.labels[i], params.labels[j]);
      if (i != j && w >= 1.0)
        throw ContractError("build_omega: entry >= 1 at " + pair_name(i, j) + "; rescale theta");
      omega(i, j) = w;
      omega(j, i) = w;
    }
  }
  return omega;
}

Eigen::MatrixXd build_omega(const Eigen::VectorXd& theta, const Eigen::MatrixXd& pi,
                            const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(theta.size());
  Eigen::MatrixXd block = pi * p * pi.transpose();
  Eigen::MatrixXd omega = theta.asDiagonal() * block * theta.asDiagonal();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (omega(i, j) >= 1.0)
        throw ContractError("build_omega: entry >= 1 at " + pair_name(i, j) + "; rescale theta");
  return omega;
}

AdjacencyMatrix sample_adjacency(const Eigen::MatrixXd& omega, Rng& rng) {
  const int n = static_cast<int>(omega.rows());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(omega(i, j))) edges.emplace_back(i, j);
  return AdjacencyMatrix::from_edges(n, edges);
}

AdjacencyMatrix sample_adjacency(const DcbmParams& params, Rng& rng) {
  const int n = params.n();
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = params.theta[i] * params.theta[j] * params.p(params.labels[i], params.labels[j]);
      if (rng.bernoulli(w)) edges.emplace_back(i, j);
    }
  }
  return AdjacencyMatrix::from_edges(n, edges);
}

HphSpectrum hph_spectrum(const DcbmParams& params) {
  const int k = params.k();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < params.n(); ++i) h[params.labels[i]] += params.theta[i] * params.theta[i];
  const double norm2 = params.theta.squaredNorm();
  for (int a = 0; a < k; ++a) {
    if (h[a] <= 0) throw ContractError("hph_spectrum: community " + std::to_string(a) + " empty");
    h[a] = std::sqrt(h[a] / norm2);
  }

  HphSpectrum out;
  out.h = h;
  Eigen::MatrixXd hph = h.asDiagonal() * params.p * h.asDiagonal();
  small_sym_eig(hph, out.mu, out.eta);

  if (k > 1) {
    // Perron: simple top eigenvalue with a positive eigenvector unless P is
    // reducible; flag instead of failing
    const bool gap_ok = std::abs(out.mu[0]) - std::abs(out.mu[1]) > 1e-12 * std::abs(out.mu[0]);
    bool positive = true;
    double s = out.eta.col(0).sum();
    for (int a = 0; a < k; ++a) positive = positive && (s >= 0 ? out.eta(a, 0) > 0 : out.eta(a, 0) < 0);
    out.top_not_simple = !gap_ok || !positive;
    if (out.eta.col(0).sum() < 0) out.eta.col(0) = -out.eta.col(0);
  }
  return out;
}

SnrReport snr_report(const DcbmParams& params) {
  params.validate();  // includes the P non-singularity check
  const HphSpectrum spec = hph_spectrum(params);
  SnrReport rep;
  const double norm2 = params.theta.squaredNorm();
  rep.lambda = norm2 * spec.mu;
  rep.theta_max = params.theta.maxCoeff();
  rep.theta_min = params.theta.minCoeff();
  rep.theta_norm = std::sqrt(norm2);
  rep.theta_l1 = params.theta.lpNorm<1>();
  const double lambda1 = rep.lambda[0];
  if (!(lambda1 > 0)) throw Error("snr_report: leading eigenvalue not positive");
  rep.snr = std::abs(rep.lambda[params.k() - 1]) / std::sqrt(lambda1);
  rep.a0 = (rep.theta_min / rep.theta_max) *
           (rep.theta_norm / std::sqrt(rep.theta_max * rep.theta_l1));
  rep.s_n = rep.a0 * rep.snr;
  return rep;
}

LowerBoundModel build_lower_bound_model(const DcbmParams& base, int m, double b_n, Rng& rng,
                                        double condition_tol) {
  if (m < 1) throw ContractError("build_lower_bound_model: m must be >= 1");
  if (!(b_n > 0.0 && b_n <= 1.0))
    throw ContractError("build_lower_bound_model: b_n must lie in (0,1]");
  const int k0 = base.k();
  const int k = k0 + m;

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
  const double block_scale = (m + 1) / (1.0 + m * b_n);
  Eigen::MatrixXd mm = (1.0 - b_n) * Eigen::MatrixXd::Identity(m + 1, m + 1) +
                       b_n * Eigen::MatrixXd::Ones(m + 1, m + 1);
  if (k0 > 1) {
    const Eigen::MatrixXd s = base.p.topLeftCorner(k0 - 1, k0 - 1);
    const Eigen::VectorXd beta = base.p.col(k0 - 1).head(k0 - 1);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
    if (!lu.isInvertible())
      throw ContractError("build_lower_bound_model: leading block of P is singular");
    const double cond = std::abs(beta.dot(lu.solve(beta)) - 1.0);
    if (cond < condition_tol)
      throw ContractError("build_lower_bound_model: |beta' S^-1 beta - 1| below tolerance");
    p.topLeftCorner(k0 - 1, k0 - 1) = s;
    p.topRightCorner(k0 - 1, m + 1) = beta * Eigen::RowVectorXd::Ones(m + 1);
    p.bottomLeftCorner(m + 1, k0 - 1) = Eigen::VectorXd::Ones(m + 1) * beta.transpose();
  }
  p.bottomRightCorner(m + 1, m + 1) = block_scale * mm;

  // the last community splits uniformly over the m+1 new ones
  std::vector<int> labels(base.labels);
  for (int i = 0; i < base.n(); ++i) {
    if (labels[i] == k0 - 1) labels[i] = k0 - 1 + static_cast<int>(rng.below(m + 1));
  }

  // unit-diagonal reparametrization: theta*_i = theta_i * sqrt(P_cc)
  Eigen::VectorXd d(k);
  for (int a = 0; a < k; ++a) d[a] = std::sqrt(p(a, a));
  LowerBoundModel out;
  out.p_raw = p;
  out.theta_raw = base.theta;
  out.k0 = k0;
  out.m = m;
  out.b_n = b_n;
  out.params.p = d.cwiseInverse().asDiagonal() * p * d.cwiseInverse().asDiagonal();
  out.params.p.diagonal().setOnes();  // exact by construction
  out.params.labels = std::move(labels);
  out.params.theta.resize(base.n());
  for (int i = 0; i < base.n(); ++i)
    out.params.theta[i] = base.theta[i] * d[out.params.labels[i]];
  return out;
}

std::int64_t apply_variant(Eigen::MatrixXd& omega, const MembershipVariant& variant, Rng& rng) {
  if (variant.mode != MembershipVariant::Mode::Outlier) return 0;
  const int n = static_cast<int>(omega.rows());
  const int n_out = static_cast<int>(variant.outlier_fraction * n);
  if (n_out == 0) return 0;

  const double total = omega.sum();
  const double rho = (variant.rho_rule == MembershipVariant::RhoRule::RowMean)
                         ? total / n
                         : total / (static_cast<double>(n) * n);

  const std::vector<int> perm = rng.permutation(n);
  std::vector<char> selected(n, 0);
  for (int i = 0; i < n_out; ++i) selected[perm[i]] = 1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (selected[i] || selected[j])) omega(i, j) = rho;
    }
  }

  std::int64_t clipped = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && omega(i, j) >= 1.0) {
        omega(i, j) = kClipCeiling;
        ++clipped;
      }
    }
  }
  return clipped / 2;
}

GeneratedModel generate_model(const SimulationConfig& config, Rng& rng) {
  config.validate();
  GeneratedModel out;
  out.theta = sample_theta(config, rng);
  out.labels = sample_labels(config.pi_weights, config.n, rng);

  out.pi = Eigen::MatrixXd::Zero(config.n, config.k);
  for (int i = 0; i < config.n; ++i) out.pi(i, out.labels[i]) = 1.0;
  if (config.variant.mode == MembershipVariant::Mode::Mixed) {
    for (int i = 0; i < config.n; ++i) {
      if (!rng.bernoulli(config.variant.dirichlet_weight)) continue;
      // Dirichlet(1_K): normalized iid Exp(1)
      double total = 0.0;
      for (int a = 0; a < config.k; ++a) {
        const double e = -std::log(1.0 - rng.uniform01());
        out.pi(i, a) = e;
        total += e;
      }
      out.pi.row(i) /= total;
      int argmax = 0;
      out.pi.row(i).maxCoeff(&argmax);
      out.labels[i] = argmax;
    }
  }

  const Eigen::MatrixXd p =
      build_p_matrix(config.p_pattern, config.k, config.b_n,
                     config.p_pattern == PPattern::Custom ? &config.p_custom : nullptr);
  out.omega = build_omega(out.theta, out.pi, p);
  out.clipped_entries = apply_variant(out.omega, config.variant, rng);
  return out;
}

}  // namespace stgof
