#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtomo/diagnostics.hpp"
#include "qtomo/simulation.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

/// One ensemble study: draw targets, simulate, reconstruct, diagnose.
struct ExperimentSpec {
  std::string name = "experiment";
  StateEnsembleSpec ensemble;
  std::string set = "cube";  // named set expression
  double mean_flux = 2000.0;
  NoiseConfig noise;
  /// Drift ratios to sweep. Empty means a single point at noise.drift_ratio.
  std::vector<double> drift_ratios;
  int repetitions = 1000;
  std::vector<DiagnosisMethod> methods{DiagnosisMethod::rank_counting, DiagnosisMethod::naive};
  DiagnosisConfig diagnostics;  // method field is ignored, see `methods`
  std::vector<std::string> outputs{"summary", "runs"};

  std::vector<double> sweep_points() const;
  void validate() const;
};

struct Histogram {
  std::vector<double> edges;  // bins are [edges[i], edges[i+1]), last bin closed
  std::vector<std::int64_t> counts;
};

/// Freedman-Diaconis bins spanning [min, max] of the sample, at most `max_bins`.
Histogram freedman_diaconis_histogram(const std::vector<double>& values, int max_bins = 200);
/// Counts on fixed edges; values outside the range are dropped.
std::vector<std::int64_t> histogram_counts(const std::vector<double>& values, const std::vector<double>& edges);

struct MethodOutcome {
  DiagnosisMethod method = DiagnosisMethod::rank_counting;
  int dof = 0;
  std::optional<double> quality;
  std::vector<bool> flagged;  // per confidence level
  std::optional<double> p_value;
  std::optional<double> kappa_bar;
};

struct RunRecord {
  int point = 0;  // sweep index
  int index = 0;  // repetition index
  std::uint64_t seed = 0;
  double drift_ratio = 0.0;
  double target_p = 0.0;  // NaN for the rank-biased ensemble
  double target_purity = 0.0;
  bool included = false;
  std::string failure;  // reason when excluded
  int rank = 0;
  double chi_squared = 0.0;
  double fidelity = 0.0;
  int iterations = 0;
  std::vector<double> eigenvalues;  // of the trace-normalised estimate, descending
  std::vector<MethodOutcome> outcomes;
};

struct RankGroup {
  int rank = 0;
  int dof = 0;  // M - l(2d - l)
  int count = 0;
  double mean_chi_squared = 0.0;
  double sd_chi_squared = 0.0;
  std::vector<std::int64_t> histogram;  // on EnsembleSummary::chi_squared_edges
};

struct FlagRates {
  DiagnosisMethod method = DiagnosisMethod::rank_counting;
  std::vector<double> levels;
  std::vector<std::int64_t> flagged;
  std::vector<double> rates;  // flagged / included
};

struct EnsembleSummary {
  double drift_ratio = 0.0;
  int repetitions = 0;
  int included = 0;
  int excluded = 0;
  std::vector<std::string> exclusions;  // "run <i>: <reason>"
  double mean_chi_squared = 0.0;
  double sd_chi_squared = 0.0;
  double full_rank_fraction = 0.0;
  double mean_fidelity = 0.0;
  double mean_target_purity = 0.0;
  std::vector<double> chi_squared_edges;
  std::vector<RankGroup> ranks;  // l = 1..d, partitions the included runs
  std::vector<FlagRates> flag_rates;
  Histogram eigenvalue_log10;          // log10 of normalised eigenvalues
  std::int64_t eigenvalues_below = 0;  // eigenvalues under the first edge, zeros included
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::uint64_t seed = 0;
  int dim = 0;
  int settings = 0;
  std::vector<EnsembleSummary> points;  // one per sweep point
  std::vector<RunRecord> runs;          // point-major, then repetition
};

/// Run i uses stream derive_seed(master_seed, i) at every sweep point, so a
/// drift sweep sees the same targets and phases throughout. Output does not
/// depend on `parallelism`. More than 5% failed runs at any point throws
/// ExperimentError.
ExperimentResult run_experiment(const ExperimentSpec& spec, int parallelism, std::uint64_t master_seed);

/// One row per run.
std::string runs_csv(const ExperimentResult& result);

struct PuritySweepOptions {
  double baseline_flux = 2000.0;
  /// Equal total time: each set gets baseline_flux * reference_settings / M.
  int reference_settings = 36;
  int repetitions = 500;
  std::uint64_t seed = 0;
  int parallelism = 1;
  DiagnosisConfig diagnostics;
};

struct PuritySweepPoint {
  std::string set;
  int settings = 0;
  double p = 0.0;
  double mean_flux = 0.0;
  int included = 0;
  double mean_chi_squared = 0.0;
  double sd_chi_squared = 0.0;
  double full_rank_fraction = 0.0;
  double mean_fidelity = 0.0;
};

/// Werner targets (two-qubit Werner states for d = 4, Werner-like otherwise)
/// at each p for each set.
std::vector<PuritySweepPoint> werner_purity_sweep(const std::vector<std::string>& sets,
                                                  const std::vector<double>& p_grid,
                                                  const PuritySweepOptions& options);

std::string purity_sweep_csv(const std::vector<PuritySweepPoint>& points);

}  // namespace qtomo
