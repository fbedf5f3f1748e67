#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qtomo/error.hpp"
#include "qtomo/experiments.hpp"
#include "qtomo/io.hpp"

using namespace qtomo;

namespace {

ExperimentSpec werner_spec(const std::string& set, int dim, double p_min, double p_max, int reps) {
  ExperimentSpec spec;
  spec.name = "t";
  spec.set = set;
  spec.ensemble.kind = dim == 4 ? EnsembleKind::werner_two_qubit : EnsembleKind::werner_like;
  spec.ensemble.dim = dim;
  spec.ensemble.p_min = p_min;
  spec.ensemble.p_max = p_max;
  spec.repetitions = reps;
  return spec;
}

double standard_error(const EnsembleSummary& s) { return s.sd_chi_squared / std::sqrt(double(s.included)); }

}  // namespace

TEST(Spec, SweepPointsAndValidation) {
  ExperimentSpec spec;
  spec.noise.drift_ratio = 0.4;
  EXPECT_EQ(spec.sweep_points(), std::vector<double>{0.4});
  spec.drift_ratios = {0.0, 0.5, 1.0};
  EXPECT_EQ(spec.sweep_points(), spec.drift_ratios);
  EXPECT_NO_THROW(spec.validate());

  ExperimentSpec bad = spec;
  bad.drift_ratios = {0.5, 0.5};
  EXPECT_THROW(bad.validate(), DomainError);
  bad = spec;
  bad.repetitions = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = spec;
  bad.outputs = {"plots"};
  EXPECT_THROW(bad.validate(), DomainError);
  bad = spec;
  bad.set = "cube^2";  // ensemble is still a qubit
  EXPECT_THROW(run_experiment(bad, 1, 1), DomainError);
}

TEST(Histogram, FixedEdges) {
  const std::vector<double> edges{0.0, 1.0, 2.0};
  const auto c = histogram_counts({0.0, 0.5, 1.0, 1.5, 2.0, 3.0, -1.0}, edges);
  EXPECT_EQ(c, (std::vector<std::int64_t>{2, 3}));
}

TEST(Histogram, FreedmanDiaconisWidth) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 0.0);
  // Quartiles by linear interpolation are 24.75 and 74.25.
  const double width = 2.0 * 49.5 / std::cbrt(100.0);
  const int bins = static_cast<int>(std::ceil(99.0 / width));
  const Histogram h = freedman_diaconis_histogram(v);
  ASSERT_EQ(h.edges.size(), static_cast<size_t>(bins) + 1);
  EXPECT_EQ(h.edges.front(), 0.0);
  EXPECT_EQ(h.edges.back(), 99.0);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}), 100);

  EXPECT_EQ(freedman_diaconis_histogram({3.0, 3.0}).counts, std::vector<std::int64_t>{2});
  EXPECT_TRUE(freedman_diaconis_histogram({}).edges.empty());
  EXPECT_LE(freedman_diaconis_histogram(v, 3).counts.size(), 3u);
}

TEST(RunExperiment, IndependentOfParallelism) {
  ExperimentSpec spec = werner_spec("cube^2", 4, 0.3, 0.7, 24);
  spec.drift_ratios = {0.0, 1.0};
  spec.methods = {DiagnosisMethod::rank_counting, DiagnosisMethod::naive, DiagnosisMethod::monte_carlo};
  spec.diagnostics.mc_samples = 10;
  const ExperimentResult a = run_experiment(spec, 1, 42);
  const ExperimentResult b = run_experiment(spec, 3, 42);
  EXPECT_EQ(runs_csv(a), runs_csv(b));
  EXPECT_EQ(summary_to_json(a).dump(), summary_to_json(b).dump());
  EXPECT_NE(runs_csv(a), runs_csv(run_experiment(spec, 1, 43)));
}

TEST(RunExperiment, SummaryPartitionsIncludedRuns) {
  ExperimentSpec spec;
  spec.name = "rb";
  spec.set = "cube^2";
  spec.ensemble.kind = EnsembleKind::rank_biased;
  spec.ensemble.dim = 4;
  spec.repetitions = 120;
  const ExperimentResult r = run_experiment(spec, 1, 7);
  ASSERT_EQ(r.points.size(), 1u);
  const EnsembleSummary& s = r.points[0];
  EXPECT_EQ(r.dim, 4);
  EXPECT_EQ(r.settings, 36);
  EXPECT_EQ(s.included + s.excluded, 120);
  ASSERT_EQ(s.ranks.size(), 4u);
  int total = 0;
  for (const RankGroup& g : s.ranks) {
    EXPECT_EQ(g.dof, 36 - count_constraints(g.rank, 4));
    EXPECT_EQ(std::accumulate(g.histogram.begin(), g.histogram.end(), std::int64_t{0}), g.count);
    total += g.count;
  }
  EXPECT_EQ(total, s.included);
  for (const FlagRates& f : s.flag_rates)
    for (size_t i = 0; i < f.levels.size(); ++i) EXPECT_DOUBLE_EQ(f.rates[i], double(f.flagged[i]) / s.included);

  std::int64_t eigen_total = s.eigenvalues_below;
  for (auto c : s.eigenvalue_log10.counts) eigen_total += c;
  EXPECT_EQ(eigen_total, 4 * s.included);

  for (const RunRecord& run : r.runs) {
    EXPECT_TRUE(std::isnan(run.target_p));
    ASSERT_EQ(run.outcomes.size(), 2u);
    EXPECT_LE(run.outcomes[1].dof, run.outcomes[0].dof);  // naive never exceeds rank counting
  }
}

TEST(RunExperiment, QubitCubeMeanMatchesNaiveDof) {
  const ExperimentResult r = run_experiment(werner_spec("cube", 2, 1.0 / 3, 2.0 / 3, 400), 1, 11);
  const EnsembleSummary& s = r.points[0];
  EXPECT_NEAR(s.mean_chi_squared, 2.0, 4 * standard_error(s));
  EXPECT_GT(s.full_rank_fraction, 0.99);
}

TEST(RunExperiment, MinimalTwoQubitSetFitsExactly) {
  const ExperimentResult r = run_experiment(werner_spec("tetrahedron^2", 4, 0.2, 0.2, 100), 1, 12);
  const EnsembleSummary& s = r.points[0];
  const RankGroup& full = s.ranks[3];
  EXPECT_GT(full.count, 90);
  EXPECT_LT(full.mean_chi_squared, 1e-3);
  EXPECT_EQ(full.dof, 0);
}

TEST(RunExperiment, OvercompleteTwoQubitMean) {
  const ExperimentResult r = run_experiment(werner_spec("cube^2", 4, 0.2, 0.2, 300), 1, 13);
  const EnsembleSummary& s = r.points[0];
  EXPECT_NEAR(s.mean_chi_squared, 20.0, 4 * standard_error(s));
  EXPECT_NEAR(s.sd_chi_squared, std::sqrt(40.0), 0.15 * std::sqrt(40.0));
}

TEST(RunExperiment, DriftRaisesFlagRate) {
  ExperimentSpec spec = werner_spec("cube^2", 4, 1.0 / 3, 2.0 / 3, 200);
  spec.drift_ratios = {0.0, 1.0, 2.0};
  spec.methods = {DiagnosisMethod::rank_counting};
  const ExperimentResult r = run_experiment(spec, 1, 14);
  ASSERT_EQ(r.points.size(), 3u);
  double previous = -1.0;
  for (const EnsembleSummary& s : r.points) {
    const double rate = s.flag_rates[0].rates[0];
    EXPECT_GT(rate, previous) << "r=" << s.drift_ratio;
    previous = rate;
  }
  EXPECT_LT(r.points[0].flag_rates[0].rates[0], 0.12);
  EXPECT_GT(r.points[2].flag_rates[0].rates[0], 0.9);
}

TEST(RunExperiment, TooManyFailuresThrow) {
  ExperimentSpec spec = werner_spec("cube^2", 4, 0.3, 0.7, 20);
  spec.diagnostics.optimizer.max_iterations = 1;
  EXPECT_THROW(run_experiment(spec, 1, 15), ExperimentError);
}

TEST(PuritySweep, EqualTotalTimeAndFidelityOrdering) {
  PuritySweepOptions opts;
  opts.repetitions = 500;
  opts.seed = 16;
  const auto points = werner_purity_sweep({"tetrahedron^2", "cube^2", "octahedron^2"}, {0.9}, opts);
  ASSERT_EQ(points.size(), 3u);
  EXPECT_DOUBLE_EQ(points[0].mean_flux, 2000.0 * 36 / 16);
  EXPECT_DOUBLE_EQ(points[1].mean_flux, 2000.0);
  EXPECT_DOUBLE_EQ(points[2].mean_flux, 2000.0 * 36 / 64);
  EXPECT_GE(points[1].mean_fidelity, points[0].mean_fidelity);
  EXPECT_GE(points[2].mean_fidelity, points[0].mean_fidelity);
  const std::string csv = purity_sweep_csv(points);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
