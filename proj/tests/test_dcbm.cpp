#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stgof/dcbm.hpp"
#include "oracles.hpp"

using namespace stgof;

namespace {

DcbmParams two_block_params(int n, double theta_value, double offdiag) {
  DcbmParams params;
  params.theta = Eigen::VectorXd::Constant(n, theta_value);
  params.labels.resize(n);
  for (int i = 0; i < n; ++i) params.labels[i] = i < n / 2 ? 0 : 1;
  params.p.resize(2, 2);
  params.p << 1.0, offdiag, offdiag, 1.0;
  return params;
}

DcbmParams random_params(Rng& rng, int n, int k) {
  DcbmParams params;
  params.p = Eigen::MatrixXd::Identity(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) params.p(a, b) = params.p(b, a) = rng.uniform(0.05, 0.95);
  params.theta.resize(n);
  for (int i = 0; i < n; ++i) params.theta[i] = rng.uniform(0.05, 0.6);
  params.labels.resize(n);
  for (int i = 0; i < n; ++i)
    params.labels[i] = (i < k) ? i : static_cast<int>(rng.below(k));  // no empty community
  return params;
}

}  // namespace

TEST_CASE("omega for identity P is block diagonal") {
  DcbmParams params = two_block_params(6, 1.0, 0.0);
  // theta = 1 forces within-block entries to 1; keep them below 1 by contract
  params.theta.setConstant(0.9);
  const Eigen::MatrixXd omega = build_omega(params);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      const bool same = params.labels[i] == params.labels[j];
      CHECK(omega(i, j) == doctest::Approx(same ? 0.81 : 0.0));
    }
  }
}

TEST_CASE("omega scalar case") {
  DcbmParams params;
  params.theta.resize(2);
  params.theta << 0.3, 0.5;
  params.labels = {0, 0};
  params.p = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::MatrixXd omega = build_omega(params);
  CHECK(omega(0, 1) == doctest::Approx(0.15));
}

TEST_CASE("hard-label omega equals the general membership route") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + static_cast<int>(rng.below(10));
    const int k = 1 + static_cast<int>(rng.below(3));
    const DcbmParams params = random_params(rng, n, k);
    const Eigen::MatrixXd direct = build_omega(params);
    Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, k);
    for (int i = 0; i < n; ++i) pi(i, params.labels[i]) = 1.0;
    const Eigen::MatrixXd general = build_omega(params.theta, pi, params.p);
    CHECK((direct - general).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("omega entries at or above one are rejected with the pair") {
  DcbmParams params = two_block_params(4, 1.2, 0.5);
  try {
    build_omega(params);
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("zero omega samples the empty graph, unit omega the complete graph") {
  Rng rng(1);
  const AdjacencyMatrix empty = sample_adjacency(Eigen::MatrixXd::Zero(5, 5), rng);
  CHECK(empty.edge_count() == 0);
  const AdjacencyMatrix full = sample_adjacency(Eigen::MatrixXd::Ones(5, 5), rng);
  CHECK(full.edge_count() == 10);
}

TEST_CASE("sampling is reproducible and matches omega frequencies") {
  DcbmParams params;
  params.theta.resize(5);
  params.theta << 0.3, 0.5, 0.7, 0.4, 0.6;
  params.labels = {0, 0, 1, 1, 0};
  params.p.resize(2, 2);
  params.p << 1.0, 0.4, 0.4, 1.0;
  const Eigen::MatrixXd omega = build_omega(params);

  // byte-identical under the same seed
  Rng r1(99), r2(99);
  CHECK(edge_list_string(sample_adjacency(omega, r1)) ==
        edge_list_string(sample_adjacency(omega, r2)));

  // empirical frequencies within 3 sigma binomial bands over 10^4 draws
  const int draws = 10000;
  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(5, 5);
  for (int t = 0; t < draws; ++t) {
    Rng rng_t(4242, t);
    const AdjacencyMatrix g = sample_adjacency(omega, rng_t);
    for (int i = 0; i < 5; ++i)
      for (int j : g.neighbors(i)) hits(i, j) += 0.5;  // each edge counted twice
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const double p = omega(i, j);
      const double freq = (hits(i, j) + hits(j, i)) / draws;
      const double sigma = std::sqrt(p * (1 - p) / draws);
      CHECK(std::abs(freq - p) <= 3 * sigma);
    }
  }
}

TEST_CASE("constant theta law gives beta_n / sqrt(n) everywhere") {
  SimulationConfig config;
  config.n = 16;
  config.k = 1;
  config.beta_n = 4.0;
  config.b_n = 0.5;
  config.theta.kind = ThetaLaw::Kind::TwoPoint;
  config.theta.p = 1.0;
  config.theta.a = 1.0;
  config.theta.b = 2.0;
  Rng rng(3);
  const Eigen::VectorXd theta = sample_theta(config, rng);
  for (int i = 0; i < 16; ++i) CHECK(theta[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("theta normalization is exact") {
  SimulationConfig config;
  config.n = 500;
  config.k = 1;
  config.beta_n = 10.0;
  config.theta.kind = ThetaLaw::Kind::Uniform;
  config.theta.a = 2.0;
  config.theta.b = 3.0;
  Rng rng(17);
  const Eigen::VectorXd theta = sample_theta(config, rng);
  CHECK(theta.norm() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(theta.minCoeff() > 0);
}

TEST_CASE("pareto draws pass a KS test against the closed-form cdf") {
  const double shape = 8.0, scale = 0.375;
  SimulationConfig config;
  config.n = 100000;
  config.k = 1;
  config.beta_n = 1.0;  // normalization does not affect the pre-normalized draws below
  config.theta.kind = ThetaLaw::Kind::Pareto;
  config.theta.shape = shape;
  config.theta.scale = scale;
  Rng rng(20240915);
  // regenerate the raw draws the way sample_theta does, without normalization
  std::vector<double> draws(config.n);
  for (int i = 0; i < config.n; ++i)
    draws[i] = scale * std::pow(1.0 - rng.uniform01(), -1.0 / shape);
  const double d = oracle::ks_statistic(draws, [&](double x) {
    return x < scale ? 0.0 : 1.0 - std::pow(scale / x, shape);
  });
  // asymptotic critical value at level 0.01
  const double critical = 1.628 / std::sqrt(static_cast<double>(config.n));
  CHECK(d < critical);
}

TEST_CASE("snr report on the symmetric two-block model") {
  const double b = 0.4;
  const int n = 50;
  DcbmParams params = two_block_params(n, 0.3, b);
  const SnrReport rep = snr_report(params);
  // analytic spectrum of (1-b) I + b 1 1' under equal blocks
  CHECK(rep.lambda[1] / rep.lambda[0] == doctest::Approx((1 - b) / (1 + b)).epsilon(1e-10));
  CHECK(rep.a0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.s_n == doctest::Approx(rep.snr).epsilon(1e-12));
}

TEST_CASE("snr eigenvalues equal the dense oracle") {
  Rng rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + static_cast<int>(rng.below(30));
    const int k = 2 + static_cast<int>(rng.below(3));
    const DcbmParams params = random_params(rng, n, k);
    const SnrReport rep = snr_report(params);
    const Eigen::VectorXd dense = oracle::dense_eigenvalues(build_omega(params));
    for (int j = 0; j < k; ++j)
      CHECK(rep.lambda[j] == doctest::Approx(dense[j]).epsilon(1e-8));
  }
}

TEST_CASE("snr report is invariant under node permutation") {
  Rng rng(31337);
  const DcbmParams params = random_params(rng, 24, 3);
  const SnrReport rep = snr_report(params);
  const std::vector<int> perm = rng.permutation(24);
  DcbmParams shuffled = params;
  for (int i = 0; i < 24; ++i) {
    shuffled.theta[perm[i]] = params.theta[i];
    shuffled.labels[perm[i]] = params.labels[i];
  }
  const SnrReport rep2 = snr_report(shuffled);
  CHECK((rep.lambda - rep2.lambda).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(rep.a0 == doctest::Approx(rep2.a0));
}

TEST_CASE("hph spectrum basics") {
  DcbmParams single;
  single.theta = Eigen::VectorXd::Constant(10, 0.2);
  single.labels.assign(10, 0);
  single.p = Eigen::MatrixXd::Ones(1, 1);
  const HphSpectrum spec1 = hph_spectrum(single);
  CHECK(spec1.h[0] == doctest::Approx(1.0));
  CHECK(spec1.mu[0] == doctest::Approx(1.0));

  const int k = 4;
  const double b = 0.3;
  DcbmParams params;
  const int n = 40;
  params.theta = Eigen::VectorXd::Constant(n, 0.2);
  params.labels.resize(n);
  for (int i = 0; i < n; ++i) params.labels[i] = i % k;
  params.p = (1 - b) * Eigen::MatrixXd::Identity(k, k) + b * Eigen::MatrixXd::Ones(k, k);
  const HphSpectrum spec = hph_spectrum(params);
  CHECK(spec.mu[0] == doctest::Approx((1 + (k - 1) * b) / k).epsilon(1e-12));
  for (int j = 1; j < k; ++j) CHECK(spec.mu[j] == doctest::Approx((1 - b) / k).epsilon(1e-12));
  for (int j = 0; j < k; ++j) CHECK(spec.eta(j, 0) > 0);  // Perron column
}

TEST_CASE("eigen relation lambda_k = ||theta||^2 mu_k across random models") {
  Rng rng(8086);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 20 + static_cast<int>(rng.below(40));
    const int k = 1 + static_cast<int>(rng.below(4));
    const DcbmParams params = random_params(rng, n, k);
    const HphSpectrum spec = hph_spectrum(params);
    const Eigen::VectorXd dense = oracle::dense_eigenvalues(build_omega(params));
    const double norm2 = params.theta.squaredNorm();
    // compare as sorted sets: near-ties may legitimately reorder
    Eigen::VectorXd lhs = (norm2 * spec.mu).eval();
    Eigen::VectorXd rhs = dense.head(k);
    std::sort(lhs.data(), lhs.data() + k);
    std::sort(rhs.data(), rhs.data() + k);
    for (int j = 0; j < k; ++j) CHECK(lhs[j] == doctest::Approx(rhs[j]).epsilon(1e-8));
    // the remaining n-k dense eigenvalues vanish
    for (int j = k; j < n; ++j) CHECK(std::abs(dense[j]) < 1e-8 * std::max(1.0, dense[0]));
  }
}

TEST_CASE("lower bound collapse at b_n = 1") {
  DcbmParams base;
  base.theta = Eigen::VectorXd::Constant(30, 0.3);
  base.labels.assign(30, 0);
  base.p = Eigen::MatrixXd::Ones(1, 1);
  Rng rng(10);
  const LowerBoundModel lb = build_lower_bound_model(base, 1, 1.0, rng);
  CHECK(lb.p_raw.rows() == 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(lb.p_raw(a, b) == doctest::Approx(1.0));
  // expected adjacency has rank one
  const Eigen::VectorXd dense = oracle::dense_eigenvalues(build_omega(lb.params));
  CHECK(std::abs(dense[1]) < 1e-10 * dense[0]);
}

TEST_CASE("reparametrization preserves omega exactly") {
  Rng rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    DcbmParams base = random_params(rng, 20, 2);
    base.p(0, 1) = base.p(1, 0) = 0.5;  // keep |beta' S^-1 beta - 1| well away from 0
    const double b_n = rng.uniform(0.6, 0.95);
    const LowerBoundModel lb = build_lower_bound_model(base, 2, b_n, rng);

    Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(20, lb.p_raw.rows());
    for (int i = 0; i < 20; ++i) pi(i, lb.params.labels[i]) = 1.0;
    const Eigen::MatrixXd raw = build_omega(lb.theta_raw, pi, lb.p_raw);
    const Eigen::MatrixXd reparam = build_omega(lb.params.theta, pi, lb.params.p);
    CHECK((raw - reparam).cwiseAbs().maxCoeff() < 1e-12);
    for (int a = 0; a < lb.params.p.rows(); ++a) CHECK(lb.params.p(a, a) == 1.0);
  }
}

TEST_CASE("lower bound SNR stays under the theorem-style cap") {
  Rng rng(2718);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 200;
    DcbmParams base;
    base.theta = Eigen::VectorXd::Constant(n, 0.0);
    for (int i = 0; i < n; ++i) base.theta[i] = rng.uniform(0.2, 0.5);
    base.labels.resize(n);
    for (int i = 0; i < n; ++i) base.labels[i] = (i < 2) ? i : static_cast<int>(rng.below(2));
    base.p.resize(2, 2);
    base.p << 1.0, 0.5, 0.5, 1.0;

    const double b_n = rng.uniform(0.85, 0.99);
    const LowerBoundModel lb = build_lower_bound_model(base, 1, b_n, rng);
    const HphSpectrum spec = hph_spectrum(lb.params);
    const double norm2 = lb.params.theta.squaredNorm();
    const double lambda1 = norm2 * spec.mu[0];
    const double lambda_k = norm2 * spec.mu[spec.mu.size() - 1];
    const double snr = std::abs(lambda_k) / std::sqrt(lambda1);
    CHECK(snr <= 5.0 * base.theta.norm() * (1.0 - b_n));
  }
}

TEST_CASE("condition check rejects degenerate base models") {
  DcbmParams base;
  base.theta = Eigen::VectorXd::Constant(10, 0.3);
  base.labels = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  base.p.resize(2, 2);
  base.p << 1.0, 1.0, 1.0, 1.0;  // beta' S^-1 beta = 1 exactly
  Rng rng(4);
  CHECK_THROWS_AS(build_lower_bound_model(base, 1, 0.9, rng), ContractError);
}

TEST_CASE("outlier variant edge cases") {
  Rng rng(12);
  DcbmParams params = two_block_params(10, 0.3, 0.4);
  const Eigen::MatrixXd omega = build_omega(params);

  MembershipVariant none;
  none.mode = MembershipVariant::Mode::Outlier;
  none.outlier_fraction = 0.0;
  Eigen::MatrixXd w = omega;
  CHECK(apply_variant(w, none, rng) == 0);
  CHECK((w - omega).cwiseAbs().maxCoeff() == 0.0);

  // n-1 of n selected covers every off-diagonal pair
  MembershipVariant all;
  all.mode = MembershipVariant::Mode::Outlier;
  all.outlier_fraction = 0.95;
  all.rho_rule = MembershipVariant::RhoRule::EntryMean;
  const double rho = omega.sum() / (10.0 * 10.0);
  w = omega;
  apply_variant(w, all, rng);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (i != j) CHECK(w(i, j) == doctest::Approx(rho));
}

TEST_CASE("row-mean rho rule clips and counts") {
  DcbmParams params = two_block_params(10, 0.9, 0.4);
  Eigen::MatrixXd omega = build_omega(params);
  MembershipVariant variant;
  variant.mode = MembershipVariant::Mode::Outlier;
  variant.outlier_fraction = 0.3;
  variant.rho_rule = MembershipVariant::RhoRule::RowMean;  // sum/n > 1 here by construction
  Rng rng(7);
  const double rho = omega.sum() / 10.0;
  REQUIRE(rho >= 1.0);
  const std::int64_t clipped = apply_variant(omega, variant, rng);
  CHECK(clipped > 0);
  CHECK(omega.maxCoeff() < 1.0);
}

TEST_CASE("mixed variant with zero weight reduces to hard DCBM") {
  SimulationConfig config;
  config.n = 30;
  config.k = 3;
  config.beta_n = 3.0;
  config.b_n = 0.3;
  config.pi_weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  config.p_pattern = PPattern::ConstantOffdiag;
  config.replicates = 1;
  config.seed = 777;
  SimulationConfig mixed = config;
  mixed.variant.mode = MembershipVariant::Mode::Mixed;
  mixed.variant.dirichlet_weight = 0.0;

  Rng r1(config.seed), r2(config.seed);
  const GeneratedModel hard_model = generate_model(config, r1);
  const GeneratedModel mixed_model = generate_model(mixed, r2);
  CHECK(hard_model.labels == mixed_model.labels);
  CHECK((hard_model.omega - mixed_model.omega).cwiseAbs().maxCoeff() == 0.0);
}
