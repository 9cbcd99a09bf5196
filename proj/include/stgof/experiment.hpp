#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stgof/config.hpp"
#include "stgof/dcbm.hpp"
#include "stgof/stgof.hpp"

namespace stgof {

// SimulationConfig <-> dotted key-value schema (model.*, theta.*, pi.*, P.*,
// variant.*, run.*). Round-trips losslessly.
SimulationConfig parse_simulation_config(const KvFile& kv);
KvFile simulation_config_to_kv(const SimulationConfig& config);

struct ExperimentSpec {
  SimulationConfig base;          // beta_n / b_n overridden per sweep point
  std::vector<double> sweep_beta; // empty -> single point at base.beta_n/base.b_n
  double snr_target = 0.0;        // (1 - b_n) * beta_n held at this value
  StgofConfig estimator;
  int bootstrap_n = 0;            // > 0 switches to the empirical-null estimator
  int threads = 0;

  // b_n solved from the target; throws naming the sweep point if outside (0,1)
  double solve_b_n(double beta) const;
};

ExperimentSpec parse_experiment_spec(const KvFile& kv);

struct AccuracyRow {
  double beta_n = 0.0;
  double b_n = 0.0;
  double accuracy = 0.0;
  int replicates = 0;
  std::vector<double> mean_psi;  // per working dimension 1..K (NaN if never evaluated)
  double mean_runtime_ms = 0.0;
};

struct AccuracyTable {
  int k = 0;
  std::vector<AccuracyRow> rows;
  std::string to_csv() const;  // schema column + header, stable across runs
};

using ProgressFn = std::function<void(const std::string&)>;

// Full sweep: for each beta, `replicates` independent graphs, each estimated
// with a per-replicate seed stream; accuracy is the fraction with k_hat == K.
AccuracyTable run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

struct CalibrationSample {
  int replicate = 0;
  int m = 0;
  GofStatistics stats;
  bool ok = false;
  std::string error;
};

struct CalibrationResult {
  int k = 0;
  int replicates = 0;
  std::vector<CalibrationSample> samples;  // replicate-major, m = 1..K each
  std::string samples_csv() const;
  std::string summary_csv() const;  // per m: mean, sd, quantiles of psi
};

// Null calibration: psi at every working dimension m = 1..K for each
// replicate (no stopping rule).
CalibrationResult run_calibration(const ExperimentSpec& spec, const ProgressFn& progress = {});

struct GenerateOptions {
  bool lower_bound_pair = false;
  int lb_m = 1;
  double lb_b_n = 0.95;
};

// Writes per-replicate edge lists + ground-truth labels under
// prefix_rNNN.edges / .labels, plus model descriptors. In lower-bound mode
// emits the base and enlarged models (sharing theta) side by side.
void run_generate(const ExperimentSpec& spec, const GenerateOptions& opt,
                  const std::string& prefix);

}  // namespace stgof
