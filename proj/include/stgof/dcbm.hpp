#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stgof/graph.hpp"
#include "stgof/rng.hpp"

namespace stgof {

// Degree-corrected block model with hard community labels: edge probability
// omega_ij = theta_i * theta_j * P(c_i, c_j). P is symmetric with unit
// diagonal; its near-singularity is only checked where the caller asks for it
// (the lower-bound construction deliberately produces near-singular P).
struct DcbmParams {
  Eigen::VectorXd theta;    // positive, length n
  std::vector<int> labels;  // in 0..K-1
  Eigen::MatrixXd p;        // K x K

  int n() const { return static_cast<int>(theta.size()); }
  int k() const { return static_cast<int>(p.rows()); }

  // Checks positivity of theta, label range, symmetry and unit diagonal of P,
  // off-diagonal omega entries in [0,1), and (when min_singular_value > 0)
  // non-singularity of P. Throws ContractError naming the first offense.
  void validate(double min_singular_value = 1e-12) const;
};

struct ThetaLaw {
  enum class Kind { Uniform, Pareto, TwoPoint };
  Kind kind = Kind::Uniform;
  double a = 2.0, b = 3.0;          // uniform(a, b); two-point values a / b
  double shape = 8.0, scale = 0.375;  // pareto
  double p = 0.95;                  // two-point: P(value = a)
};

struct MembershipVariant {
  enum class Mode { Hard, Mixed, Outlier };
  // rho rule for the outlier overwrite: RowMean is sum(omega)/n,
  // EntryMean is sum(omega)/n^2
  enum class RhoRule { RowMean, EntryMean };
  Mode mode = Mode::Hard;
  double dirichlet_weight = 0.0;   // mixed: probability a node gets a Dirichlet(1_K) row
  double outlier_fraction = 0.0;   // outlier: fraction of nodes overwritten
  RhoRule rho_rule = RhoRule::RowMean;
};

enum class PPattern { Toeplitz, LinearOffdiag, ConstantOffdiag, Custom };

struct SimulationConfig {
  int n = 0;
  int k = 0;
  double beta_n = 0.0;  // target ||theta||
  double b_n = 0.0;
  ThetaLaw theta;
  std::vector<double> pi_weights;  // categorical law over communities
  PPattern p_pattern = PPattern::ConstantOffdiag;
  Eigen::MatrixXd p_custom;        // used when p_pattern == Custom
  MembershipVariant variant;
  int replicates = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

// Community-structure matrix for a pattern at a given b_n. Toeplitz:
// P(k,l) = 1 - (1-b)(|k-l|+1)/K off the diagonal; linear off-diagonal:
// P(k,l) = 1 - |k-l|(1-b)/(K-1); constant off-diagonal: b everywhere off the
// diagonal. Diagonal is always 1.
Eigen::MatrixXd build_p_matrix(PPattern pattern, int k, double b_n,
                               const Eigen::MatrixXd* custom = nullptr);

// theta_i = beta_n * t_i / ||t|| for iid t_i from the configured law, so
// ||theta|| equals beta_n exactly.
Eigen::VectorXd sample_theta(const SimulationConfig& config, Rng& rng);

std::vector<int> sample_labels(const std::vector<double>& weights, int n, Rng& rng);

// Dense expected adjacency, diagonal included (the eigenstructure identities
// hold for the full matrix; sampling ignores the diagonal). Throws if any
// off-diagonal entry lands outside [0,1).
Eigen::MatrixXd build_omega(const DcbmParams& params);

// General (possibly mixed-membership) form with row-stochastic pi (n x K).
Eigen::MatrixXd build_omega(const Eigen::VectorXd& theta, const Eigen::MatrixXd& pi,
                            const Eigen::MatrixXd& p);

// Independent Bernoulli(omega_ij) for i < j, symmetrized, empty diagonal.
AdjacencyMatrix sample_adjacency(const Eigen::MatrixXd& omega, Rng& rng);
AdjacencyMatrix sample_adjacency(const DcbmParams& params, Rng& rng);

struct SnrReport {
  Eigen::VectorXd lambda;  // K signed eigenvalues of omega, by |.| descending
  double snr = 0.0;        // |lambda_K| / sqrt(lambda_1)
  double a0 = 0.0;         // degree-heterogeneity factor in (0, 1]
  double s_n = 0.0;        // a0 * snr
  double theta_max = 0.0, theta_min = 0.0, theta_norm = 0.0, theta_l1 = 0.0;
};

// Spectrum of omega through the K x K reduction (exact; never touches the
// n x n matrix).
SnrReport snr_report(const DcbmParams& params);

struct HphSpectrum {
  Eigen::VectorXd h;    // H_kk = ||theta restricted to community k|| / ||theta||
  Eigen::VectorXd mu;   // eigenvalues of H P H by |.| descending
  Eigen::MatrixXd eta;  // unit-norm eigenvectors, columns matching mu
  bool top_not_simple = false;  // reducible P: top eigenvalue not simple
};

HphSpectrum hph_spectrum(const DcbmParams& params);

// Enlarged model that splits the last community of `base` into m+1
// statistically near-identical pieces; (1-b_n) controls how distinguishable
// the pieces are. Both the raw (theta, P) and the unit-diagonal
// reparametrization (theta*, P*) describe the same expected adjacency.
struct LowerBoundModel {
  DcbmParams params;         // reparametrized: unit-diagonal P*, theta*
  Eigen::MatrixXd p_raw;     // enlarged P before reparametrization
  Eigen::VectorXd theta_raw; // base theta (shared with the K0-community model)
  int k0 = 0;
  int m = 0;
  double b_n = 0.0;
};

LowerBoundModel build_lower_bound_model(const DcbmParams& base, int m, double b_n, Rng& rng,
                                        double condition_tol = 0.05);

// Outlier overwrite: picks floor(fraction * n) nodes and resets every entry in
// their rows/columns to rho (by the configured rule). Entries >= 1 anywhere in
// the result are clipped to 1 - 1e-9; the return value counts clipped entries.
std::int64_t apply_variant(Eigen::MatrixXd& omega, const MembershipVariant& variant, Rng& rng);

// Full generative pipeline for one replicate: theta, memberships (variant
// aware), omega with any outlier overwrite applied.
struct GeneratedModel {
  Eigen::VectorXd theta;
  std::vector<int> labels;  // argmax community for mixed rows
  Eigen::MatrixXd pi;       // n x K, one-hot unless mixed
  Eigen::MatrixXd omega;
  std::int64_t clipped_entries = 0;
};

GeneratedModel generate_model(const SimulationConfig& config, Rng& rng);

}  // namespace stgof
