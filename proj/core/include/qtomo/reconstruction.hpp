#pragma once

#include <string>
#include <vector>

#include "qtomo/measurement.hpp"
#include "qtomo/simulation.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

enum class OptimizerStrategy {
  /// Monotone FISTA with adaptive restart and backtracking (default).
  accelerated_projected_gradient,
  /// Plain projected gradient with Armijo backtracking.
  projected_gradient,
};

std::string to_string(OptimizerStrategy strategy);
OptimizerStrategy optimizer_strategy_from_string(const std::string& name);

struct OptimizerOptions {
  int max_iterations = 20000;
  /// Stop when the objective decrease over one iteration is below this
  /// fraction of max(objective, 1)...
  double relative_tolerance = 1e-10;
  /// ...and the gradient-mapping norm is below this fraction of sum_j N_j.
  double gradient_tolerance = 1e-8;
  /// Floor on the expected counts in the objective's denominators, as a
  /// fraction of sum_j N_j.
  double denominator_floor = 1e-9;
  OptimizerStrategy strategy = OptimizerStrategy::accelerated_projected_gradient;
  bool record_history = false;

  void validate() const;
};

struct ReconstructionResult {
  DensityMatrix estimate;          // unnormalised; trace is the brightness estimate
  std::vector<double> residuals;   // N_j - n_j(estimate)
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_mapping_norm = 0.0;
  std::vector<double> objective_history;
};

/// Least-squares linear inversion sum_k (pinv(q) N)_k O_k. Hermitian, trace
/// equal to the brightness estimate, not necessarily positive.
/// Throws DomainError for informationally incomplete sets.
ComplexMatrix linear_inversion(const CountDataset& dataset, const ProjectorSet& set);

/// sum_j (N_j - n_j)^2 / max(n_j, floor) with n_j = Tr[P_j candidate].
/// `floor` is absolute here.
double objective(const CountDataset& dataset, const ComplexMatrix& candidate, double floor);
/// Same with the default floor 1e-9 * sum_j N_j.
double objective(const CountDataset& dataset, const DensityMatrix& candidate);

/// Absolute denominator floor used for a dataset under the given options.
double denominator_floor(const CountDataset& dataset, const OptimizerOptions& options = {});

/// Minimises the weighted least-squares objective over the positive
/// semidefinite cone with the trace left free. Starts from the PSD projection
/// of the linear inversion. Returns with converged = false if the iteration
/// budget runs out. Throws DomainError for incomplete sets or all-zero counts.
ReconstructionResult mle_reconstruct(const CountDataset& dataset, const ProjectorSet& set,
                                     const OptimizerOptions& options = {});
inline ReconstructionResult mle_reconstruct(const CountDataset& dataset, const OptimizerOptions& options = {}) {
  return mle_reconstruct(dataset, dataset.set, options);
}

}  // namespace qtomo
