// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: qtomo_acceptance [master_seed] [output_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qtomo/chi2.hpp"
#include "qtomo/diagnostics.hpp"
#include "qtomo/experiments.hpp"
#include "qtomo/io.hpp"

using namespace qtomo;

namespace {

std::uint64_t g_seed = 20240601;
std::filesystem::path g_outdir = "acceptance_out";
constexpr int kWideParallelism = 4;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Ensemble outputs kept for the determinism rerun.
struct Artifact {
  ExperimentSpec spec;
  std::uint64_t seed;
  std::string csv;
  std::string json;
};
std::vector<Artifact> g_artifacts;

ExperimentResult run_and_keep(const ExperimentSpec& spec, std::uint64_t seed) {
  ExperimentResult r = run_experiment(spec, 1, seed);
  Artifact a{spec, seed, runs_csv(r), summary_to_json(r).dump(2) + "\n"};
  write_text_file((g_outdir / (spec.name + "_runs.csv")).string(), a.csv);
  write_text_file((g_outdir / (spec.name + "_summary.json")).string(), a.json);
  g_artifacts.push_back(std::move(a));
  return r;
}

ExperimentSpec base_spec(const std::string& name, const std::string& set, EnsembleKind kind, int dim, int reps) {
  ExperimentSpec s;
  s.name = name;
  s.set = set;
  s.ensemble.kind = kind;
  s.ensemble.dim = dim;
  s.repetitions = reps;
  s.mean_flux = 2000.0;
  return s;
}

double rate_at_95(const EnsembleSummary& s, DiagnosisMethod m) {
  for (const FlagRates& f : s.flag_rates)
    if (f.method == m)
      for (size_t i = 0; i < f.levels.size(); ++i)
        if (f.levels[i] == 0.95) return f.rates[i];
  return std::nan("");
}

struct Verdict {
  bool pass;
  std::string detail;
};

// ---------------------------------------------------------------- criteria

Verdict full_rank_distribution() {
  struct System {
    const char* set;
    int dim;
  };
  const std::vector<System> systems{{"cube", 2}, {"icosahedron", 2}, {"quditcube:3", 3}, {"cube^2", 4}};
  bool pass = true;
  std::string detail;
  for (size_t k = 0; k < systems.size(); ++k) {
    const System& sys = systems[k];
    ExperimentSpec spec = base_spec(std::string("c1_") + (k == 3 ? "cube2" : k == 2 ? "quditcube3" : sys.set),
                                    sys.set, EnsembleKind::werner_like, sys.dim, 1000);
    spec.methods = {DiagnosisMethod::naive};
    const ExperimentResult r = run_and_keep(spec, derive_seed(g_seed, 100 + k));
    const EnsembleSummary& s = r.points[0];
    const double kappa = r.settings - sys.dim * sys.dim;
    const double se = s.sd_chi_squared / std::sqrt(double(s.included));
    const double sigma = std::sqrt(2 * kappa);
    const bool mean_ok = std::abs(s.mean_chi_squared - kappa) <= 4 * se;
    const bool sd_ok = std::abs(s.sd_chi_squared - sigma) <= 0.15 * sigma;
    pass &= mean_ok && sd_ok;
    detail += std::string(k ? "; " : "") + sys.set + " mean=" + fmt("%.3f", s.mean_chi_squared) + " (" +
              fmt("%.0f", kappa) + "+-" + fmt("%.3f", 4 * se) + ") sd=" + fmt("%.3f", s.sd_chi_squared) + " (" +
              fmt("%.3f", sigma) + ")";
  }
  return {pass, detail};
}

Verdict constraint_formula() {
  const std::vector<std::array<int, 3>> cases{{1, 2, 3}, {2, 2, 4}, {1, 4, 7}, {2, 4, 12}, {3, 4, 15}, {4, 4, 16}};
  bool pass = true;
  std::string detail;
  for (const auto& [l, d, c] : cases) {
    const int got = count_constraints(l, d);
    pass &= got == c;
    detail += "c(" + std::to_string(l) + "," + std::to_string(d) + ")=" + std::to_string(got) + " ";
  }
  return {pass, detail};
}

Verdict pure_state_grouping() {
  ExperimentSpec spec = base_spec("c3_icosahedron_pure", "icosahedron", EnsembleKind::werner_like, 2, 1000);
  spec.ensemble.p_min = spec.ensemble.p_max = 1.0;  // Haar-random pure targets
  spec.methods = {DiagnosisMethod::rank_counting};
  const ExperimentResult r = run_and_keep(spec, derive_seed(g_seed, 3));
  const RankGroup& g = r.points[0].ranks[0];
  const double se = g.sd_chi_squared / std::sqrt(double(g.count));
  const bool pass = g.count > 1 && std::abs(g.mean_chi_squared - 17.0) <= 4 * se;
  return {pass, "rank-1 runs=" + std::to_string(g.count) + " mean=" + fmt("%.3f", g.mean_chi_squared) +
                    " (17+-" + fmt("%.3f", 4 * se) + ")"};
}

Verdict minimal_set_perfect_fit() {
  ExperimentSpec spec = base_spec("c4_tetrahedron2", "tetrahedron^2", EnsembleKind::werner_two_qubit, 4, 200);
  spec.ensemble.p_min = spec.ensemble.p_max = 0.2;
  spec.methods = {DiagnosisMethod::rank_counting};
  const ExperimentResult r = run_and_keep(spec, derive_seed(g_seed, 4));
  int full = 0, perfect = 0;
  for (const RunRecord& run : r.runs) {
    if (!run.included || run.rank != 4) continue;
    ++full;
    perfect += run.chi_squared < 1e-3;
  }
  const double fraction = full ? double(perfect) / full : 0.0;
  return {full > 0 && fraction >= 0.95, std::to_string(perfect) + "/" + std::to_string(full) +
                                            " full-rank fits with X2<1e-3 (" + fmt("%.1f", 100 * fraction) + "%)"};
}

Verdict over_diagnosis() {
  ExperimentSpec spec = base_spec("c5_rank_biased_cube2", "cube^2", EnsembleKind::rank_biased, 4, 5000);
  spec.methods = {DiagnosisMethod::rank_counting, DiagnosisMethod::naive};
  const ExperimentResult r = run_and_keep(spec, derive_seed(g_seed, 5));
  const double rank = rate_at_95(r.points[0], DiagnosisMethod::rank_counting);
  const double naive = rate_at_95(r.points[0], DiagnosisMethod::naive);
  const bool pass = naive >= 0.10 && naive <= 0.25 && rank >= 0.05 && rank <= 0.12 && rank < naive;
  return {pass, "naive=" + fmt("%.2f", 100 * naive) + "% rank=" + fmt("%.2f", 100 * rank) + "%"};
}

Verdict monte_carlo_null() {
  ExperimentSpec spec = base_spec("c6_mc_cube2", "cube^2", EnsembleKind::rank_biased, 4, 200);
  spec.methods = {DiagnosisMethod::monte_carlo};
  spec.diagnostics.mc_samples = 100;
  const ExperimentResult r = run_and_keep(spec, derive_seed(g_seed, 6));
  const double rate = rate_at_95(r.points[0], DiagnosisMethod::monte_carlo);
  return {rate >= 0.03 && rate <= 0.12, "flag rate=" + fmt("%.1f", 100 * rate) + "% over " +
                                            std::to_string(r.points[0].included) + " datasets"};
}

Verdict drift_detection() {
  ExperimentSpec spec = base_spec("c7_drift_cube2", "cube^2", EnsembleKind::rank_biased, 4, 500);
  spec.drift_ratios = {0.0, 0.3, 0.6, 1.0};
  spec.noise.drift_period = 9.5;
  spec.methods = {DiagnosisMethod::rank_counting};
  const ExperimentResult r = run_and_keep(spec, derive_seed(g_seed, 7));
  std::vector<double> rates;
  std::string detail;
  for (const EnsembleSummary& s : r.points) {
    rates.push_back(rate_at_95(s, DiagnosisMethod::rank_counting));
    detail += "r=" + fmt("%g", s.drift_ratio) + ":" + fmt("%.1f", 100 * rates.back()) + "% ";
  }
  bool monotone = true;
  for (size_t i = 1; i < rates.size(); ++i) monotone &= rates[i] >= rates[i - 1];
  const bool pass = monotone && rates[2] >= 0.40 && rates[3] >= 0.60;
  if (!monotone) detail += "(not monotone)";
  return {pass, detail};
}

Verdict round_trip_and_optimality() {
  bool pass = true;
  double worst_li = 0.0, worst_gap = -1e300, worst_psd = 0.0;
  int cases = 0, unconverged = 0;
  const std::vector<const char*> systems{"cube", "icosahedron", "quditcube:3", "cube^2"};
  for (size_t k = 0; k < systems.size(); ++k) {
    const ProjectorSet set = named_set(systems[k]);
    Rng rng(derive_seed(g_seed, 800 + k));
    for (int trial = 0; trial < 100; ++trial, ++cases) {
      // Noiseless inversion at a brightness large enough that integer rounding is negligible.
      const DensityMatrix state = trial % 2 ? rank_biased_random(set.dim(), rng) : haar_pure(set.dim(), rng);
      const double bright = 1e12;
      std::vector<std::int64_t> exact;
      for (double n : expected_counts(state.scaled(bright), set)) exact.push_back(std::llround(n));
      const CountDataset noiseless{set, exact, bright, std::nullopt};
      worst_li = std::max(worst_li, (linear_inversion(noiseless, set) / bright - state.matrix()).norm());

      const CountDataset data = simulate_dataset(state, set, 2000, {}, rng);
      const ReconstructionResult r = mle_reconstruct(data, set);
      unconverged += !r.converged;
      const double floor = denominator_floor(data);
      const double total = data.total_counts();
      const std::vector<ComplexMatrix> candidates{
          project_psd(linear_inversion(data, set)), state.scaled(2000.0).matrix(),
          ComplexMatrix::Identity(set.dim(), set.dim()) * (total / set.size())};
      for (const ComplexMatrix& c : candidates)
        worst_gap = std::max(worst_gap, r.objective - objective(data, c, floor) - 1e-6 * (1 + r.objective));
      worst_psd = std::min(worst_psd, r.estimate.eigenvalues().minCoeff() / r.estimate.trace());
    }
  }
  // Low-flux near-pure qubits, where linear inversion often leaves the Bloch ball.
  const ProjectorSet cube = named_set("cube");
  Rng rng(derive_seed(g_seed, 899));
  for (int trial = 0; trial < 500; ++trial) {
    const CountDataset data = simulate_dataset(werner_like(2, 0.95, rng), cube, 100, {}, rng);
    if (data.total_counts() == 0) continue;
    const ReconstructionResult r = mle_reconstruct(data, cube);
    worst_psd = std::min(worst_psd, r.estimate.eigenvalues().minCoeff() / r.estimate.trace());
  }
  pass = worst_li <= 1e-10 && worst_gap <= 0.0 && worst_psd >= -1e-9 && unconverged == 0;
  return {pass, std::to_string(cases) + " cases: inversion err=" + fmt("%.2e", worst_li) + " worst objective excess=" +
                    fmt("%.2e", worst_gap) + " min eig/trace=" + fmt("%.2e", worst_psd) +
                    " unconverged=" + std::to_string(unconverged)};
}

Verdict statistical_kernels() {
  const double q = chi2_quantile(0.95, 20.0);
  const double oracle_q = oracle::chi2_quantile_quadrature(0.95, 20.0);
  const bool quantile_ok = std::abs(q - 31.410) <= 1e-3 && std::abs(q - oracle_q) <= 1e-3;

  Rng rng(derive_seed(g_seed, 9));
  double worst_round_trip = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double p = 1e-6 + (1 - 2e-6) * rng.uniform();
    const double k = 0.5 + 200 * rng.uniform();
    worst_round_trip = std::max(worst_round_trip, std::abs(chi2_cdf(chi2_quantile(p, k), k) - p));
  }

  const int draws = 100000;
  double s = 0, s2 = 0;
  int zeros = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = double(sample_poisson(100.0, rng));
    s += x;
    s2 += x * x;
    zeros += sample_poisson(3.0, rng) == 0;
  }
  const double mean = s / draws, var = s2 / draws - mean * mean, p0 = double(zeros) / draws;
  const bool poisson_ok =
      std::abs(mean - 100) <= 0.3 && std::abs(var - 100) <= 2.0 && std::abs(p0 - std::exp(-3.0)) <= 0.003;
  return {quantile_ok && worst_round_trip <= 1e-9 && poisson_ok,
          "q95(20)=" + fmt("%.6f", q) + " oracle=" + fmt("%.6f", oracle_q) + " round-trip=" +
              fmt("%.1e", worst_round_trip) + " poisson(100) mean=" + fmt("%.3f", mean) + " var=" + fmt("%.2f", var) +
              " P0(3)=" + fmt("%.4f", p0)};
}

Verdict determinism() {
  int identical = 0;
  std::string mismatched;
  for (const Artifact& a : g_artifacts) {
    const ExperimentResult wide = run_experiment(a.spec, kWideParallelism, a.seed);
    const bool same = runs_csv(wide) == a.csv && summary_to_json(wide).dump(2) + "\n" == a.json;
    identical += same;
    if (!same) mismatched += " " + a.spec.name;
  }
  const bool pass = !g_artifacts.empty() && identical == int(g_artifacts.size());
  return {pass, std::to_string(identical) + "/" + std::to_string(g_artifacts.size()) +
                    " ensemble outputs byte-identical at parallelism 1 and " + std::to_string(kWideParallelism) +
                    (mismatched.empty() ? "" : "; differing:" + mismatched)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_seed = std::stoull(argv[1]);
  if (argc > 2) g_outdir = argv[2];
  std::filesystem::create_directories(g_outdir);
  std::printf("master seed %llu, outputs in %s\n", static_cast<unsigned long long>(g_seed), g_outdir.c_str());

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, full_rank_distribution}, {2, constraint_formula}, {3, pure_state_grouping},
      {4, minimal_set_perfect_fit}, {5, over_diagnosis},    {6, monte_carlo_null},
      {7, drift_detection},         {8, round_trip_and_optimality}, {9, statistical_kernels},
      {10, determinism},
  };
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("%s criterion %d: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
