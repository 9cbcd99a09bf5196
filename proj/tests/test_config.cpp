#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>

#include "stgof/config.hpp"
#include "stgof/experiment.hpp"

using namespace stgof;

TEST_CASE("kv parsing: comments, whitespace, lists") {
  const KvFile kv = KvFile::parse_string(
      "# a comment\n"
      "model.n = 600\n"
      "model.beta_n = 12.5   # trailing comment\n"
      "sweep.beta = 10 11 12\n"
      "\n"
      "theta.law = uniform\n");
  CHECK(kv.get_int("model.n") == 600);
  CHECK(kv.get_double("model.beta_n") == doctest::Approx(12.5));
  CHECK(kv.get_doubles("sweep.beta") == std::vector<double>{10, 11, 12});
  CHECK(kv.get_string("theta.law") == "uniform");
  CHECK_FALSE(kv.has("missing.key"));
  CHECK_THROWS_AS(kv.get_string("missing.key"), Error);
}

TEST_CASE("kv parse errors carry line numbers") {
  try {
    KvFile::parse_string("model.n = 1\nnot a kv line\n", "spec");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("spec:2") != std::string::npos);
  }
}

TEST_CASE("simulation config round trips through the file format") {
  SimulationConfig config;
  config.n = 600;
  config.k = 4;
  config.beta_n = 12.534987123456789;
  config.b_n = 0.242187913460214;
  config.theta.kind = ThetaLaw::Kind::Pareto;
  config.theta.shape = 8.0;
  config.theta.scale = 0.375;
  config.pi_weights = {0.3, 0.35, 0.2, 0.15};
  config.p_pattern = PPattern::Toeplitz;
  config.variant.mode = MembershipVariant::Mode::Outlier;
  config.variant.outlier_fraction = 0.1;
  config.variant.rho_rule = MembershipVariant::RhoRule::RowMean;
  config.replicates = 100;
  config.seed = 424242;

  const KvFile kv = simulation_config_to_kv(config);
  const SimulationConfig back = parse_simulation_config(KvFile::parse_string(kv.to_string()));
  CHECK(back.n == config.n);
  CHECK(back.k == config.k);
  CHECK(back.beta_n == config.beta_n);  // exact: %.17g round trip
  CHECK(back.b_n == config.b_n);
  CHECK(back.theta.kind == config.theta.kind);
  CHECK(back.theta.shape == config.theta.shape);
  CHECK(back.theta.scale == config.theta.scale);
  CHECK(back.pi_weights == config.pi_weights);
  CHECK(back.p_pattern == config.p_pattern);
  CHECK(back.variant.mode == config.variant.mode);
  CHECK(back.variant.outlier_fraction == config.variant.outlier_fraction);
  CHECK(back.replicates == config.replicates);
  CHECK(back.seed == config.seed);
}

TEST_CASE("experiment spec solves b_n from the sweep target") {
  const KvFile kv = KvFile::parse_string(
      "model.n = 600\n"
      "model.K = 4\n"
      "theta.law = uniform\n"
      "theta.a = 2\n"
      "theta.b = 3\n"
      "P.pattern = toeplitz\n"
      "sweep.beta = 10 11 12 13 14\n"
      "sweep.snr_target = 9.5\n"
      "run.replicates = 100\n"
      "run.seed = 42\n");
  const ExperimentSpec spec = parse_experiment_spec(kv);
  CHECK(spec.sweep_beta.size() == 5);
  CHECK(spec.solve_b_n(10.0) == doctest::Approx(1.0 - 9.5 / 10.0));
  CHECK(spec.solve_b_n(14.0) == doctest::Approx(1.0 - 9.5 / 14.0));
}

TEST_CASE("infeasible sweep points are rejected naming the point") {
  const KvFile kv = KvFile::parse_string(
      "model.n = 200\n"
      "model.K = 2\n"
      "P.pattern = constant-offdiag\n"
      "sweep.beta = 12 8\n"     // 8 < 9.5 makes b_n negative
      "sweep.snr_target = 9.5\n"
      "run.replicates = 10\n");
  try {
    parse_experiment_spec(kv);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("beta_n=8") != std::string::npos);
    CHECK(std::string(e.what()).find("infeasible") != std::string::npos);
  }
}

TEST_CASE("experiment-1a style spec loads") {
  const KvFile kv = KvFile::parse_string(
      "model.n = 600\n"
      "model.K = 4\n"
      "theta.law = uniform\n"
      "theta.a = 2\n"
      "theta.b = 3\n"
      "P.pattern = toeplitz\n"
      "sweep.beta = 10 11 12 13 14\n"
      "sweep.snr_target = 9.5\n"
      "run.replicates = 100\n"
      "run.seed = 1\n");
  CHECK_NOTHROW(parse_experiment_spec(kv));
}

TEST_CASE("experiment-5b style spec loads") {
  const KvFile kv = KvFile::parse_string(
      "model.n = 600\n"
      "model.K = 8\n"
      "theta.law = two-point\n"
      "theta.p = 0.95\n"
      "theta.a = 1\n"
      "theta.b = 2\n"
      "P.pattern = constant-offdiag\n"
      "sweep.beta = 12 13 14 15\n"
      "sweep.snr_target = 10.5\n"
      "run.replicates = 100\n"
      "run.seed = 1\n");
  CHECK_NOTHROW(parse_experiment_spec(kv));
}

TEST_CASE("zero-replicate spec is rejected") {
  const KvFile kv = KvFile::parse_string(
      "model.n = 100\n"
      "model.K = 2\n"
      "model.beta_n = 8\n"
      "model.b_n = 0.3\n"
      "P.pattern = constant-offdiag\n"
      "run.replicates = 0\n");
  CHECK_THROWS_AS(parse_experiment_spec(kv), Error);
}
