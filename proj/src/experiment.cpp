#include "stgof/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "stgof/threadpool.hpp"

namespace stgof {

namespace {

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

ThetaLaw parse_theta_law(const KvFile& kv) {
  ThetaLaw law;
  const std::string kind = kv.get_string_or("theta.law", "uniform");
  if (kind == "uniform") {
    law.kind = ThetaLaw::Kind::Uniform;
    law.a = kv.get_double_or("theta.a", 2.0);
    law.b = kv.get_double_or("theta.b", 3.0);
  } else if (kind == "pareto") {
    law.kind = ThetaLaw::Kind::Pareto;
    law.shape = kv.get_double_or("theta.shape", 8.0);
    law.scale = kv.get_double_or("theta.scale", 0.375);
  } else if (kind == "two-point") {
    law.kind = ThetaLaw::Kind::TwoPoint;
    law.p = kv.get_double_or("theta.p", 0.95);
    law.a = kv.get_double_or("theta.a", 1.0);
    law.b = kv.get_double_or("theta.b", 2.0);
  } else {
    throw Error("config: unknown theta.law '" + kind + "'");
  }
  return law;
}

}  // namespace

SimulationConfig parse_simulation_config(const KvFile& kv) {
  SimulationConfig config;
  config.n = static_cast<int>(kv.get_int("model.n"));
  config.k = static_cast<int>(kv.get_int("model.K"));
  config.beta_n = kv.get_double_or("model.beta_n", 0.0);
  config.b_n = kv.get_double_or("model.b_n", 0.0);
  config.theta = parse_theta_law(kv);

  if (kv.has("pi.weights")) {
    config.pi_weights = kv.get_doubles("pi.weights");
  } else {
    config.pi_weights.assign(config.k, 1.0 / config.k);
  }

  const std::string pattern = kv.get_string_or("P.pattern", "constant-offdiag");
  if (pattern == "toeplitz") {
    config.p_pattern = PPattern::Toeplitz;
  } else if (pattern == "linear-offdiag") {
    config.p_pattern = PPattern::LinearOffdiag;
  } else if (pattern == "constant-offdiag") {
    config.p_pattern = PPattern::ConstantOffdiag;
  } else if (pattern == "custom") {
    config.p_pattern = PPattern::Custom;
    const std::vector<double> entries = kv.get_doubles("P.matrix");
    if (static_cast<int>(entries.size()) != config.k * config.k)
      throw Error("config: P.matrix must have K*K row-major entries");
    config.p_custom.resize(config.k, config.k);
    for (int a = 0; a < config.k; ++a)
      for (int b = 0; b < config.k; ++b) config.p_custom(a, b) = entries[a * config.k + b];
  } else {
    throw Error("config: unknown P.pattern '" + pattern + "'");
  }

  const std::string mode = kv.get_string_or("variant.mode", "hard");
  if (mode == "hard") {
    config.variant.mode = MembershipVariant::Mode::Hard;
  } else if (mode == "mixed") {
    config.variant.mode = MembershipVariant::Mode::Mixed;
    config.variant.dirichlet_weight = kv.get_double_or("variant.dirichlet_weight", 0.2);
  } else if (mode == "outlier") {
    config.variant.mode = MembershipVariant::Mode::Outlier;
    config.variant.outlier_fraction = kv.get_double_or("variant.outlier_fraction", 0.1);
    const std::string rho = kv.get_string_or("variant.rho_rule", "row-mean");
    if (rho == "row-mean") {
      config.variant.rho_rule = MembershipVariant::RhoRule::RowMean;
    } else if (rho == "entry-mean") {
      config.variant.rho_rule = MembershipVariant::RhoRule::EntryMean;
    } else {
      throw Error("config: unknown variant.rho_rule '" + rho + "'");
    }
  } else {
    throw Error("config: unknown variant.mode '" + mode + "'");
  }

  config.replicates = static_cast<int>(kv.get_int_or("run.replicates", 100));
  config.seed = static_cast<std::uint64_t>(kv.get_int_or("run.seed", 1));
  return config;
}

KvFile simulation_config_to_kv(const SimulationConfig& config) {
  KvFile kv;
  kv.set("model.n", static_cast<long long>(config.n));
  kv.set("model.K", static_cast<long long>(config.k));
  kv.set("model.beta_n", config.beta_n);
  kv.set("model.b_n", config.b_n);
  switch (config.theta.kind) {
    case ThetaLaw::Kind::Uniform:
      kv.set("theta.law", std::string("uniform"));
      kv.set("theta.a", config.theta.a);
      kv.set("theta.b", config.theta.b);
      break;
    case ThetaLaw::Kind::Pareto:
      kv.set("theta.law", std::string("pareto"));
      kv.set("theta.shape", config.theta.shape);
      kv.set("theta.scale", config.theta.scale);
      break;
    case ThetaLaw::Kind::TwoPoint:
      kv.set("theta.law", std::string("two-point"));
      kv.set("theta.p", config.theta.p);
      kv.set("theta.a", config.theta.a);
      kv.set("theta.b", config.theta.b);
      break;
  }
  kv.set("pi.weights", config.pi_weights);
  switch (config.p_pattern) {
    case PPattern::Toeplitz: kv.set("P.pattern", std::string("toeplitz")); break;
    case PPattern::LinearOffdiag: kv.set("P.pattern", std::string("linear-offdiag")); break;
    case PPattern::ConstantOffdiag: kv.set("P.pattern", std::string("constant-offdiag")); break;
    case PPattern::Custom: {
      kv.set("P.pattern", std::string("custom"));
      std::vector<double> entries;
      for (int a = 0; a < config.k; ++a)
        for (int b = 0; b < config.k; ++b) entries.push_back(config.p_custom(a, b));
      kv.set("P.matrix", entries);
      break;
    }
  }
  switch (config.variant.mode) {
    case MembershipVariant::Mode::Hard:
      kv.set("variant.mode", std::string("hard"));
      break;
    case MembershipVariant::Mode::Mixed:
      kv.set("variant.mode", std::string("mixed"));
      kv.set("variant.dirichlet_weight", config.variant.dirichlet_weight);
      break;
    case MembershipVariant::Mode::Outlier:
      kv.set("variant.mode", std::string("outlier"));
      kv.set("variant.outlier_fraction", config.variant.outlier_fraction);
      kv.set("variant.rho_rule",
             std::string(config.variant.rho_rule == MembershipVariant::RhoRule::RowMean
                             ? "row-mean"
                             : "entry-mean"));
      break;
  }
  kv.set("run.replicates", static_cast<long long>(config.replicates));
  kv.set("run.seed", static_cast<long long>(config.seed));
  return kv;
}

double ExperimentSpec::solve_b_n(double beta) const {
  const double b = 1.0 - snr_target / beta;
  if (!(b > 0.0 && b < 1.0))
    throw Error("experiment: sweep point beta_n=" + csv_num(beta) +
                " gives infeasible b_n=" + csv_num(b) + " for target " + csv_num(snr_target));
  return b;
}

ExperimentSpec parse_experiment_spec(const KvFile& kv) {
  ExperimentSpec spec;
  spec.base = parse_simulation_config(kv);
  if (kv.has("sweep.beta")) {
    spec.sweep_beta = kv.get_doubles("sweep.beta");
    spec.snr_target = kv.get_double("sweep.snr_target");
  }
  spec.estimator.alpha = kv.get_double_or("estimator.alpha", 0.05);
  spec.estimator.k_max = static_cast<int>(kv.get_int_or("estimator.kmax", 15));
  spec.estimator.eigen.tol = kv.get_double_or("estimator.eigen_tol", 1e-8);
  spec.estimator.eigen.max_iter = static_cast<int>(kv.get_int_or("estimator.eigen_max_iter", 0));
  spec.estimator.kmeans_restarts =
      static_cast<int>(kv.get_int_or("estimator.kmeans_restarts", 20));
  spec.estimator.kmeans_max_iter =
      static_cast<int>(kv.get_int_or("estimator.kmeans_max_iter", 300));
  const std::string fallback = kv.get_string_or("estimator.fallback", "argmin");
  if (fallback == "argmin") {
    spec.estimator.fallback = StgofConfig::Fallback::ArgminPsi;
  } else if (fallback == "error") {
    spec.estimator.fallback = StgofConfig::Fallback::Error;
  } else {
    throw Error("config: unknown estimator.fallback '" + fallback + "'");
  }
  spec.bootstrap_n = static_cast<int>(kv.get_int_or("estimator.bootstrap", 0));
  spec.threads = static_cast<int>(kv.get_int_or("run.threads", 0));
  if (spec.base.replicates < 1) throw Error("experiment: run.replicates must be >= 1");

  // validate every sweep point up front
  SimulationConfig probe = spec.base;
  if (spec.sweep_beta.empty()) {
    probe.validate();
  } else {
    for (double beta : spec.sweep_beta) {
      probe.beta_n = beta;
      probe.b_n = spec.solve_b_n(beta);
      probe.validate();
    }
  }
  return spec;
}

std::string AccuracyTable::to_csv() const {
  std::string out = "schema,beta_n,b_n,accuracy,replicates";
  for (int m = 1; m <= k; ++m) out += ",psi" + std::to_string(m) + "_mean";
  out += ",mean_runtime_ms\n";
  for (const auto& row : rows) {
    out += "stgof.experiment.v1," + csv_num(row.beta_n) + "," + csv_num(row.b_n) + "," +
           csv_num(row.accuracy) + "," + std::to_string(row.replicates);
    for (double v : row.mean_psi) out += "," + csv_num(v);
    out += "," + csv_num(row.mean_runtime_ms) + "\n";
  }
  return out;
}

namespace {

struct ReplicateOutcome {
  bool correct = false;
  std::vector<double> psi;  // per m, NaN when unavailable
  double runtime_ms = 0.0;
};

ReplicateOutcome run_one_replicate(const SimulationConfig& config, const StgofConfig& est,
                                   int bootstrap_n, int k, int replicate) {
  Rng rng(config.seed, static_cast<std::uint64_t>(replicate));
  const GeneratedModel model = generate_model(config, rng);
  const AdjacencyMatrix graph = sample_adjacency(model.omega, rng);

  StgofConfig local = est;
  local.seed = splitmix64(config.seed + 0x5eed) + static_cast<std::uint64_t>(replicate);

  ReplicateOutcome out;
  out.psi.assign(k, std::numeric_limits<double>::quiet_NaN());
  const StgofResult result = bootstrap_n > 0 ? estimate_k_star(graph, local, bootstrap_n)
                                             : estimate_k(graph, local);
  out.correct = result.k_hat.has_value() && *result.k_hat == k &&
                result.terminated_by == StgofResult::Termination::Acceptance;
  for (const auto& step : result.steps) {
    if (step.has_stats && step.m <= k) out.psi[step.m - 1] = step.stats.psi;
  }
  out.runtime_ms = result.total_ms;
  return out;
}

}  // namespace

AccuracyTable run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
  AccuracyTable table;
  table.k = spec.base.k;

  std::vector<std::pair<double, double>> points;
  if (spec.sweep_beta.empty()) {
    points.emplace_back(spec.base.beta_n, spec.base.b_n);
  } else {
    for (double beta : spec.sweep_beta) points.emplace_back(beta, spec.solve_b_n(beta));
  }

  for (const auto& [beta, b_n] : points) {
    SimulationConfig config = spec.base;
    config.beta_n = beta;
    config.b_n = b_n;
    config.validate();

    const int reps = config.replicates;
    std::vector<ReplicateOutcome> outcomes(reps);
    parallel_for(reps, spec.threads, [&](int r) {
      outcomes[r] = run_one_replicate(config, spec.estimator, spec.bootstrap_n, config.k, r);
    });

    AccuracyRow row;
    row.beta_n = beta;
    row.b_n = b_n;
    row.replicates = reps;
    row.mean_psi.assign(config.k, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> psi_sum(config.k, 0.0);
    std::vector<int> psi_count(config.k, 0);
    int correct = 0;
    double runtime = 0.0;
    for (const auto& o : outcomes) {
      correct += o.correct ? 1 : 0;
      runtime += o.runtime_ms;
      for (int m = 0; m < config.k; ++m) {
        if (!std::isnan(o.psi[m])) {
          psi_sum[m] += o.psi[m];
          ++psi_count[m];
        }
      }
    }
    row.accuracy = static_cast<double>(correct) / reps;
    row.mean_runtime_ms = runtime / reps;
    for (int m = 0; m < config.k; ++m) {
      if (psi_count[m] > 0) row.mean_psi[m] = psi_sum[m] / psi_count[m];
    }
    table.rows.push_back(std::move(row));
    if (progress)
      progress("beta_n=" + csv_num(beta) + " accuracy=" + csv_num(row.accuracy));
  }
  return table;
}

CalibrationResult run_calibration(const ExperimentSpec& spec, const ProgressFn& progress) {
  const SimulationConfig& config = spec.base;
  config.validate();
  CalibrationResult result;
  result.k = config.k;
  result.replicates = config.replicates;
  result.samples.resize(static_cast<std::size_t>(config.replicates) * config.k);

  parallel_for(config.replicates, spec.threads, [&](int r) {
    Rng rng(config.seed, static_cast<std::uint64_t>(r));
    const GeneratedModel model = generate_model(config, rng);
    AdjacencyMatrix graph = sample_adjacency(model.omega, rng);
    if (!is_connected(graph)) graph = largest_component(graph).graph;

    EigenPairs eigens;
    std::string eigen_error;
    const int depth = std::min(config.k, graph.node_count() - 1);
    try {
      EigenOptions opt = spec.estimator.eigen;
      opt.seed = splitmix64(config.seed + 0xca1 + r);
      eigens = top_eigenpairs(graph, depth, opt);
    } catch (const Error& e) {
      eigen_error = e.what();
    }

    for (int m = 1; m <= config.k; ++m) {
      CalibrationSample& sample = result.samples[static_cast<std::size_t>(r) * config.k + m - 1];
      sample.replicate = r;
      sample.m = m;
      if (!eigen_error.empty() || m > depth) {
        sample.error = eigen_error.empty() ? "dimension above graph size" : eigen_error;
        continue;
      }
      try {
        std::vector<int> labels;
        if (m == 1) {
          labels.assign(graph.node_count(), 0);
        } else {
          const RatioMatrix ratios =
              score_ratio_matrix(eigens, m, default_ratio_clip(graph.node_count()));
          KmeansOptions km;
          km.restarts = spec.estimator.kmeans_restarts;
          km.max_iter = spec.estimator.kmeans_max_iter;
          km.seed = splitmix64(config.seed + 0x6b6d) + static_cast<std::uint64_t>(m) +
                    (static_cast<std::uint64_t>(r) << 20);
          labels = kmeans(ratios.r, m, km).labels;
        }
        sample.stats = psi_statistic(graph, labels);
        sample.ok = true;
      } catch (const Error& e) {
        sample.error = e.what();
      }
    }
    if (progress && (r + 1) % 25 == 0)
      progress("replicate " + std::to_string(r + 1) + "/" + std::to_string(config.replicates));
  });
  return result;
}

std::string CalibrationResult::samples_csv() const {
  std::string out = "schema,replicate,m,Q,B,C,psi,error\n";
  for (const auto& s : samples) {
    out += "stgof.calibrate.v1," + std::to_string(s.replicate) + "," + std::to_string(s.m) + ",";
    if (s.ok) {
      out += csv_num(s.stats.q) + "," + csv_num(s.stats.b) + "," + std::to_string(s.stats.c) +
             "," + csv_num(s.stats.psi) + ",";
    } else {
      out += "nan,nan,nan,nan," + s.error;
    }
    out += "\n";
  }
  return out;
}

std::string CalibrationResult::summary_csv() const {
  std::string out = "schema,m,count,mean,sd,q05,q25,q50,q75,q95\n";
  for (int m = 1; m <= k; ++m) {
    std::vector<double> psi;
    for (const auto& s : samples) {
      if (s.m == m && s.ok) psi.push_back(s.stats.psi);
    }
    std::sort(psi.begin(), psi.end());
    const int count = static_cast<int>(psi.size());
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    if (count > 0) {
      mean = std::accumulate(psi.begin(), psi.end(), 0.0) / count;
      if (count > 1) {
        double var = 0.0;
        for (double v : psi) var += (v - mean) * (v - mean);
        sd = std::sqrt(var / (count - 1));
      }
    }
    const auto quantile = [&](double q) {
      if (psi.empty()) return std::numeric_limits<double>::quiet_NaN();
      const double pos = q * (count - 1);
      const int lo = static_cast<int>(pos);
      const int hi = std::min(lo + 1, count - 1);
      return psi[lo] + (pos - lo) * (psi[hi] - psi[lo]);
    };
    out += "stgof.calibrate-summary.v1," + std::to_string(m) + "," + std::to_string(count) + "," +
           csv_num(mean) + "," + csv_num(sd) + "," + csv_num(quantile(0.05)) + "," +
           csv_num(quantile(0.25)) + "," + csv_num(quantile(0.50)) + "," +
           csv_num(quantile(0.75)) + "," + csv_num(quantile(0.95)) + "\n";
  }
  return out;
}

namespace {

void write_labels_file(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write labels file: " + path);
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << labels[i] << '\n';
}

void write_model_descriptor(const std::string& path, const Eigen::VectorXd& theta,
                            const std::vector<int>& labels, const Eigen::MatrixXd& p) {
  KvFile kv;
  kv.set("model.n", static_cast<long long>(theta.size()));
  kv.set("model.K", static_cast<long long>(p.rows()));
  std::vector<double> tv(theta.data(), theta.data() + theta.size());
  kv.set("model.theta", tv);
  std::vector<double> lv(labels.begin(), labels.end());
  kv.set("model.labels", lv);
  std::vector<double> pv;
  for (int a = 0; a < p.rows(); ++a)
    for (int b = 0; b < p.cols(); ++b) pv.push_back(p(a, b));
  kv.set("model.P", pv);
  kv.write_file(path);
}

}  // namespace

void run_generate(const ExperimentSpec& spec, const GenerateOptions& opt,
                  const std::string& prefix) {
  const SimulationConfig& config = spec.base;
  config.validate();

  if (!opt.lower_bound_pair) {
    for (int r = 0; r < config.replicates; ++r) {
      Rng rng(config.seed, static_cast<std::uint64_t>(r));
      const GeneratedModel model = generate_model(config, rng);
      const AdjacencyMatrix graph = sample_adjacency(model.omega, rng);
      const std::string tag = prefix + "_r" + std::to_string(r);
      save_edge_list(graph, tag + ".edges");
      write_labels_file(tag + ".labels", model.labels);
    }
    return;
  }

  // indistinguishable-pair mode: the base model and the enlarged model share
  // the same theta; only (labels, P) differ
  Rng model_rng(config.seed, 0xfeed);
  DcbmParams base;
  base.theta = sample_theta(config, model_rng);
  base.labels = sample_labels(config.pi_weights, config.n, model_rng);
  base.p = build_p_matrix(config.p_pattern, config.k, config.b_n,
                          config.p_pattern == PPattern::Custom ? &config.p_custom : nullptr);
  base.validate();
  const LowerBoundModel lb = build_lower_bound_model(base, opt.lb_m, opt.lb_b_n, model_rng);

  write_model_descriptor(prefix + "_base.model", base.theta, base.labels, base.p);
  write_model_descriptor(prefix + "_alt.model", lb.theta_raw, lb.params.labels, lb.p_raw);

  for (int r = 0; r < config.replicates; ++r) {
    Rng rng(config.seed, static_cast<std::uint64_t>(r));
    const AdjacencyMatrix g_base = sample_adjacency(base, rng);
    const AdjacencyMatrix g_alt = sample_adjacency(lb.params, rng);
    const std::string tag = prefix + "_r" + std::to_string(r);
    save_edge_list(g_base, tag + "_base.edges");
    write_labels_file(tag + "_base.labels", base.labels);
    save_edge_list(g_alt, tag + "_alt.edges");
    write_labels_file(tag + "_alt.labels", lb.params.labels);
  }
}

}  // namespace stgof
