#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtomo/reconstruction.hpp"

namespace qtomo {

enum class DiagnosisMethod {
  rank_counting,  // c = l(2d - l) from the reconstruction's effective rank
  naive,          // c = d^2 regardless of rank, for comparison
  monte_carlo,    // chi-bar-squared p-value with Monte-Carlo rank weights
};

std::string to_string(DiagnosisMethod method);
/// Accepts the long names and the CLI spellings "rank", "naive", "mc".
DiagnosisMethod diagnosis_method_from_string(const std::string& name);

/// Number of real parameters of an unnormalised rank-l density matrix in
/// dimension d: l(2d - l). Throws DomainError unless 1 <= l <= d.
int count_constraints(int rank, int dim);

/// X^2 = sum_j (N_j - n_j)^2 / n_j at the estimate, with the same denominator
/// floor as the reconstruction objective.
double chi_squared_statistic(const CountDataset& dataset, const DensityMatrix& estimate,
                             const OptimizerOptions& options = {});

struct ChiBarWeights {
  std::vector<double> weights;  // weights[l - 1] for rank l = 1..d
  int samples = 0;              // requested S
  int excluded = 0;             // sub-reconstructions that failed to converge
  double kappa_bar = 0.0;       // sum_l w_l (M - l(2d - l))
};

struct McOptions {
  int samples = 100;
  double threshold = kDefaultRankThreshold;
  std::uint64_t seed = 0;
  int parallelism = 1;
  OptimizerOptions optimizer;
};

/// Resimulates Poissonian data from the estimate S times, reconstructs each
/// and tallies effective ranks. Non-converged samples are excluded; more than
/// 10% exclusions raise ConvergenceError.
ChiBarWeights mc_chibar_weights(const ReconstructionResult& result, const ProjectorSet& set,
                                const McOptions& options);

/// sum_l w_l P(chi2_{kappa_l} > X^2). Terms with kappa_l <= 0 contribute 1 when
/// X^2 <= perfect_fit_tolerance and 0 otherwise.
double mc_p_value(double chi_squared, const ChiBarWeights& weights, int dim, int settings,
                  double perfect_fit_tolerance = 1e-6);

struct DiagnosisConfig {
  DiagnosisMethod method = DiagnosisMethod::rank_counting;
  double threshold = kDefaultRankThreshold;
  std::vector<double> confidence_levels{0.95, 0.99};
  int mc_samples = 100;
  std::uint64_t seed = 0;
  int parallelism = 1;
  /// X^2 below this counts as a perfect fit when no degrees of freedom remain.
  double perfect_fit_tolerance = 1e-6;
  OptimizerOptions optimizer;

  void validate() const;
};

struct DiagnosisReport {
  DiagnosisMethod method = DiagnosisMethod::rank_counting;
  int dim = 0;
  int settings = 0;
  double chi_squared = 0.0;
  int effective_rank = 0;
  int constraints = 0;
  int dof = 0;
  std::optional<double> quality;   // X^2 / dof; empty when dof == 0
  bool perfect_fit = false;        // dof == 0 and X^2 within tolerance
  double variance_corrected_width = 0.0;  // 2 dof + sum_j 1/n_j
  bool low_count_warning = false;  // some n_j < 5
  std::vector<double> confidence_levels;
  std::vector<double> cutoffs;
  std::vector<bool> flagged;

  // Monte-Carlo only.
  std::optional<double> p_value;
  std::optional<double> kappa_bar;
  std::optional<double> quality_bar;
  std::optional<ChiBarWeights> weights;

  /// Lookup by confidence level; throws DomainError if the level was not evaluated.
  double cutoff(double level) const;
  bool flagged_at(double level) const;
};

DiagnosisReport diagnose_rank_counting(const CountDataset& dataset, const ReconstructionResult& result,
                                       const DiagnosisConfig& config = {});

/// Dispatches on config.method. The reconstruction must have converged.
DiagnosisReport diagnose(const CountDataset& dataset, const ReconstructionResult& result,
                         const DiagnosisConfig& config = {});

}  // namespace qtomo
