#include "qtomo/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "qtomo/chi2.hpp"
#include "qtomo/error.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

std::string to_string(DiagnosisMethod method) {
  switch (method) {
    case DiagnosisMethod::rank_counting: return "rank_counting";
    case DiagnosisMethod::naive: return "naive";
    case DiagnosisMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

DiagnosisMethod diagnosis_method_from_string(const std::string& name) {
  if (name == "rank" || name == "rank_counting") return DiagnosisMethod::rank_counting;
  if (name == "naive") return DiagnosisMethod::naive;
  if (name == "mc" || name == "monte_carlo") return DiagnosisMethod::monte_carlo;
  throw DomainError("unknown diagnosis method '" + name + "'");
}

int count_constraints(int rank, int dim) {
  if (dim < 1 || rank < 1 || rank > dim) throw DomainError("count_constraints: rank must lie in 1..d");
  return rank * (2 * dim - rank);
}

double chi_squared_statistic(const CountDataset& dataset, const DensityMatrix& estimate,
                             const OptimizerOptions& options) {
  return objective(dataset, estimate.matrix(), denominator_floor(dataset, options));
}

ChiBarWeights mc_chibar_weights(const ReconstructionResult& result, const ProjectorSet& set,
                                const McOptions& options) {
  if (options.samples < 1) throw DomainError("mc_chibar_weights: at least one sample required");
  if (result.estimate.dim() != set.dim()) throw DomainError("mc_chibar_weights: dimension mismatch");

  std::vector<double> expected = expected_counts(result.estimate, set);
  for (double& n : expected) n = std::max(n, 0.0);

  // rank 0 marks an excluded sample.
  std::vector<int> ranks(static_cast<size_t>(options.samples), 0);
  parallel_for(ranks.size(), options.parallelism, [&](std::size_t s) {
    Rng rng(derive_seed(options.seed, s));
    CountDataset resampled{set, sample_poisson_counts(expected, rng), std::nullopt, std::nullopt};
    if (resampled.total_counts() <= 0.0) return;
    const ReconstructionResult sub = mle_reconstruct(resampled, set, options.optimizer);
    if (!sub.converged) return;
    ranks[s] = effective_rank(sub.estimate, options.threshold);
  });

  const int d = set.dim();
  ChiBarWeights out;
  out.samples = options.samples;
  out.weights.assign(static_cast<size_t>(d), 0.0);
  int included = 0;
  for (int r : ranks) {
    if (r < 1) {
      ++out.excluded;
      continue;
    }
    out.weights[static_cast<size_t>(r - 1)] += 1.0;
    ++included;
  }
  if (out.excluded * 10 > options.samples)
    throw ConvergenceError("mc_chibar_weights: " + std::to_string(out.excluded) + " of " +
                           std::to_string(options.samples) + " resampled reconstructions failed");
  for (double& w : out.weights) w /= included;
  for (int l = 1; l <= d; ++l)
    out.kappa_bar += out.weights[static_cast<size_t>(l - 1)] * (set.size() - count_constraints(l, d));
  return out;
}

namespace {

double survival_or_point_mass(double chi_squared, int dof, double tolerance) {
  if (dof <= 0) return chi_squared <= tolerance ? 1.0 : 0.0;
  return chi2_survival(std::max(chi_squared, 0.0), dof);
}

// Smallest x with sum_l w_l S(x, kappa_l) <= 1 - level.
double mixture_cutoff(const ChiBarWeights& weights, int dim, int settings, double level, double tolerance) {
  auto tail = [&](double x) { return mc_p_value(x, weights, dim, settings, tolerance); };
  if (tail(tolerance) <= 1.0 - level) return 0.0;
  double lo = tolerance;
  double hi = std::max(1.0, static_cast<double>(settings));
  while (tail(hi) > 1.0 - level) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tail(mid) > 1.0 - level) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace

double mc_p_value(double chi_squared, const ChiBarWeights& weights, int dim, int settings,
                  double perfect_fit_tolerance) {
  if (static_cast<int>(weights.weights.size()) != dim) throw DomainError("mc_p_value: one weight per rank required");
  double p = 0.0;
  for (int l = 1; l <= dim; ++l) {
    const double w = weights.weights[static_cast<size_t>(l - 1)];
    if (w == 0.0) continue;
    p += w * survival_or_point_mass(chi_squared, settings - count_constraints(l, dim), perfect_fit_tolerance);
  }
  return std::clamp(p, 0.0, 1.0);
}

void DiagnosisConfig::validate() const {
  if (!(threshold > 0.0)) throw DomainError("rank threshold must be positive");
  if (confidence_levels.empty()) throw DomainError("at least one confidence level required");
  for (double c : confidence_levels)
    if (!(c > 0.0 && c < 1.0)) throw DomainError("confidence levels must lie in (0, 1)");
  if (method == DiagnosisMethod::monte_carlo && mc_samples < 1)
    throw DomainError("Monte-Carlo diagnosis needs at least one sample");
  if (!(perfect_fit_tolerance >= 0.0)) throw DomainError("perfect-fit tolerance must be non-negative");
}

double DiagnosisReport::cutoff(double level) const {
  for (size_t i = 0; i < confidence_levels.size(); ++i)
    if (std::abs(confidence_levels[i] - level) < 1e-12) return cutoffs[i];
  throw DomainError("confidence level was not evaluated");
}

bool DiagnosisReport::flagged_at(double level) const {
  for (size_t i = 0; i < confidence_levels.size(); ++i)
    if (std::abs(confidence_levels[i] - level) < 1e-12) return flagged[i];
  throw DomainError("confidence level was not evaluated");
}

namespace {

DiagnosisReport base_report(const CountDataset& dataset, const ReconstructionResult& result,
                            const DiagnosisConfig& config) {
  config.validate();
  dataset.validate();
  if (!result.converged) throw DomainError("diagnosis requires a converged reconstruction");
  if (result.estimate.dim() != dataset.dim()) throw DomainError("diagnosis: dimension mismatch");

  DiagnosisReport report;
  report.method = config.method;
  report.dim = dataset.dim();
  report.settings = dataset.set.size();
  report.chi_squared = chi_squared_statistic(dataset, result.estimate, config.optimizer);
  report.effective_rank = std::max(1, effective_rank(result.estimate, config.threshold));
  report.confidence_levels = config.confidence_levels;

  const double floor = denominator_floor(dataset, config.optimizer);
  double inverse_sum = 0.0;
  for (double n : expected_counts(result.estimate, dataset.set)) {
    inverse_sum += 1.0 / std::max(n, floor);
    if (n < 5.0) report.low_count_warning = true;
  }
  report.variance_corrected_width = inverse_sum;  // 2 dof added once dof is known
  return report;
}

void apply_dof(DiagnosisReport& report, int constraints, double tolerance) {
  report.constraints = constraints;
  report.dof = std::max(0, report.settings - constraints);
  report.variance_corrected_width += 2.0 * report.dof;
  report.cutoffs.clear();
  report.flagged.clear();
  if (report.dof == 0) {
    report.quality.reset();
    report.perfect_fit = report.chi_squared <= tolerance;
    for (size_t i = 0; i < report.confidence_levels.size(); ++i) {
      report.cutoffs.push_back(tolerance);
      report.flagged.push_back(!report.perfect_fit);
    }
    return;
  }
  report.quality = report.chi_squared / report.dof;
  for (double level : report.confidence_levels) {
    const double cut = chi2_quantile(level, report.dof);
    report.cutoffs.push_back(cut);
    report.flagged.push_back(report.chi_squared > cut);
  }
}

}  // namespace

DiagnosisReport diagnose_rank_counting(const CountDataset& dataset, const ReconstructionResult& result,
                                       const DiagnosisConfig& config) {
  DiagnosisConfig rank_config = config;
  rank_config.method = DiagnosisMethod::rank_counting;
  DiagnosisReport report = base_report(dataset, result, rank_config);
  apply_dof(report, count_constraints(report.effective_rank, report.dim), config.perfect_fit_tolerance);
  return report;
}

DiagnosisReport diagnose(const CountDataset& dataset, const ReconstructionResult& result,
                         const DiagnosisConfig& config) {
  switch (config.method) {
    case DiagnosisMethod::rank_counting:
      return diagnose_rank_counting(dataset, result, config);
    case DiagnosisMethod::naive: {
      DiagnosisReport report = base_report(dataset, result, config);
      apply_dof(report, report.dim * report.dim, config.perfect_fit_tolerance);
      return report;
    }
    case DiagnosisMethod::monte_carlo: {
      DiagnosisReport report = base_report(dataset, result, config);
      apply_dof(report, count_constraints(report.effective_rank, report.dim), config.perfect_fit_tolerance);

      McOptions mc;
      mc.samples = config.mc_samples;
      mc.threshold = config.threshold;
      mc.seed = config.seed;
      mc.parallelism = config.parallelism;
      mc.optimizer = config.optimizer;
      const ChiBarWeights weights = mc_chibar_weights(result, dataset.set, mc);
      const double tol = config.perfect_fit_tolerance;
      report.p_value = mc_p_value(report.chi_squared, weights, report.dim, report.settings, tol);
      report.kappa_bar = weights.kappa_bar;
      if (weights.kappa_bar > 0.0) report.quality_bar = report.chi_squared / weights.kappa_bar;
      report.cutoffs.clear();
      report.flagged.clear();
      for (double level : report.confidence_levels) {
        report.cutoffs.push_back(mixture_cutoff(weights, report.dim, report.settings, level, tol));
        report.flagged.push_back(*report.p_value < 1.0 - level);
      }
      report.weights = weights;
      return report;
    }
  }
  throw DomainError("diagnose: unknown method");
}

}  // namespace qtomo
