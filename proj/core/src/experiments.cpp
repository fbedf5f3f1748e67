#include "qtomo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qtomo/error.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

std::vector<double> ExperimentSpec::sweep_points() const {
  if (drift_ratios.empty()) return {noise.drift_ratio};
  return drift_ratios;
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw DomainError("experiment name must not be empty");
  ensemble.validate();
  if (!(mean_flux > 0.0)) throw DomainError("mean flux must be positive");
  noise.validate();
  if (repetitions < 1) throw DomainError("repetitions must be at least 1");
  for (size_t i = 0; i < drift_ratios.size(); ++i) {
    if (!(drift_ratios[i] >= 0.0)) throw DomainError("drift ratios must be non-negative");
    if (i > 0 && !(drift_ratios[i] > drift_ratios[i - 1])) throw DomainError("drift ratios must be ascending");
  }
  if (methods.empty()) throw DomainError("at least one diagnosis method required");
  diagnostics.validate();
  for (const auto& o : outputs)
    if (o != "summary" && o != "runs") throw DomainError("unknown experiment output '" + o + "'");
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Histogram freedman_diaconis_histogram(const std::vector<double>& values, int max_bins) {
  Histogram h;
  if (values.empty()) return h;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi > lo)) {
    h.edges = {lo, lo + 1.0};
  } else {
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    int bins = 1;
    if (iqr > 0.0) {
      const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
      bins = std::clamp(static_cast<int>(std::ceil((hi - lo) / width)), 1, std::max(1, max_bins));
    }
    h.edges.resize(static_cast<size_t>(bins) + 1);
    for (int k = 0; k <= bins; ++k) h.edges[static_cast<size_t>(k)] = lo + (hi - lo) * k / bins;
    h.edges.back() = hi;
  }
  h.counts = histogram_counts(values, h.edges);
  return h;
}

std::vector<std::int64_t> histogram_counts(const std::vector<double>& values, const std::vector<double>& edges) {
  if (edges.size() < 2) return {};
  std::vector<std::int64_t> counts(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front() || v > edges.back()) continue;
    auto bin = static_cast<size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
    bin = std::min(bin, counts.size()) - 1;
    ++counts[bin];
  }
  return counts;
}

namespace {

RunRecord run_one(const ExperimentSpec& spec, const ProjectorSet& set, int point, int index, double drift_ratio,
                  std::uint64_t master_seed) {
  RunRecord rec;
  rec.point = point;
  rec.index = index;
  rec.seed = derive_seed(master_seed, static_cast<std::uint64_t>(index));
  rec.drift_ratio = drift_ratio;
  rec.target_p = std::numeric_limits<double>::quiet_NaN();
  try {
    Rng rng(rec.seed);
    const EnsembleDraw draw = draw_state(spec.ensemble, rng);
    rec.target_p = draw.p;
    rec.target_purity = purity(draw.state);

    NoiseConfig noise = spec.noise;
    noise.drift_ratio = drift_ratio;
    const CountDataset data = simulate_dataset(draw.state, set, spec.mean_flux, noise, rng);
    if (!(data.total_counts() > 0.0)) {
      rec.failure = "no counts recorded";
      return rec;
    }
    const ReconstructionResult recon = mle_reconstruct(data, set, spec.diagnostics.optimizer);
    rec.iterations = recon.iterations;
    if (!recon.converged) {
      rec.failure = "reconstruction did not converge";
      return rec;
    }
    rec.fidelity = fidelity(draw.state, recon.estimate);
    const RealVector ev = recon.estimate.normalized().eigenvalues();
    rec.eigenvalues.assign(ev.data(), ev.data() + ev.size());

    for (DiagnosisMethod method : spec.methods) {
      DiagnosisConfig config = spec.diagnostics;
      config.method = method;
      config.seed = derive_seed(rec.seed, 1);
      config.parallelism = 1;
      const DiagnosisReport report = diagnose(data, recon, config);
      rec.rank = report.effective_rank;
      rec.chi_squared = report.chi_squared;
      rec.outcomes.push_back({method, report.dof, report.quality, report.flagged, report.p_value, report.kappa_bar});
    }
    rec.included = true;
  } catch (const std::exception& e) {
    rec.failure = e.what();
    rec.outcomes.clear();
  }
  return rec;
}

EnsembleSummary summarise(const ExperimentSpec& spec, int dim, int settings, double drift_ratio,
                          const RunRecord* runs, int count) {
  EnsembleSummary s;
  s.drift_ratio = drift_ratio;
  s.repetitions = count;

  std::vector<double> x2, fid, purities, log_ev;
  std::vector<std::vector<double>> by_rank(static_cast<size_t>(dim));
  int full_rank = 0;
  for (int i = 0; i < count; ++i) {
    const RunRecord& r = runs[i];
    if (!r.included) {
      ++s.excluded;
      s.exclusions.push_back("run " + std::to_string(r.index) + ": " + r.failure);
      continue;
    }
    x2.push_back(r.chi_squared);
    fid.push_back(r.fidelity);
    purities.push_back(r.target_purity);
    by_rank[static_cast<size_t>(r.rank - 1)].push_back(r.chi_squared);
    if (r.rank == dim) ++full_rank;
    for (double v : r.eigenvalues) log_ev.push_back(v > 0.0 ? std::log10(v) : -std::numeric_limits<double>::infinity());
  }
  s.included = static_cast<int>(x2.size());
  if (s.excluded * 20 > count)
    throw ExperimentError("experiment '" + spec.name + "': " + std::to_string(s.excluded) + " of " +
                          std::to_string(count) + " runs failed (" + s.exclusions.front() + ")");

  double sd_unused = 0.0;
  mean_sd(x2, s.mean_chi_squared, s.sd_chi_squared);
  mean_sd(fid, s.mean_fidelity, sd_unused);
  mean_sd(purities, s.mean_target_purity, sd_unused);
  s.full_rank_fraction = s.included > 0 ? static_cast<double>(full_rank) / s.included : 0.0;

  s.chi_squared_edges = freedman_diaconis_histogram(x2).edges;
  for (int l = 1; l <= dim; ++l) {
    RankGroup g;
    g.rank = l;
    g.dof = settings - count_constraints(l, dim);
    const auto& v = by_rank[static_cast<size_t>(l - 1)];
    g.count = static_cast<int>(v.size());
    mean_sd(v, g.mean_chi_squared, g.sd_chi_squared);
    g.histogram = histogram_counts(v, s.chi_squared_edges);
    s.ranks.push_back(std::move(g));
  }

  for (size_t m = 0; m < spec.methods.size(); ++m) {
    FlagRates f;
    f.method = spec.methods[m];
    f.levels = spec.diagnostics.confidence_levels;
    f.flagged.assign(f.levels.size(), 0);
    for (int i = 0; i < count; ++i) {
      if (!runs[i].included) continue;
      for (size_t k = 0; k < f.levels.size(); ++k)
        if (runs[i].outcomes[m].flagged[k]) ++f.flagged[k];
    }
    for (auto n : f.flagged) f.rates.push_back(s.included > 0 ? static_cast<double>(n) / s.included : 0.0);
    s.flag_rates.push_back(std::move(f));
  }

  // Quarter-decade bins from 1e-16 to 1.
  for (int k = 0; k <= 64; ++k) s.eigenvalue_log10.edges.push_back(-16.0 + 0.25 * k);
  s.eigenvalue_log10.counts = histogram_counts(log_ev, s.eigenvalue_log10.edges);
  for (double v : log_ev)
    if (v < s.eigenvalue_log10.edges.front()) ++s.eigenvalues_below;
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, int parallelism, std::uint64_t master_seed) {
  spec.validate();
  const ProjectorSet set = named_set(spec.set);
  if (set.dim() != spec.ensemble.dim)
    throw DomainError("experiment '" + spec.name + "': ensemble dimension does not match set '" + spec.set + "'");
  // Build the lazy caches once before the workers share the set.
  set.inversion_matrix();
  set.coefficient_rank();

  ExperimentResult result;
  result.spec = spec;
  result.seed = master_seed;
  result.dim = set.dim();
  result.settings = set.size();

  const std::vector<double> points = spec.sweep_points();
  const auto reps = static_cast<size_t>(spec.repetitions);
  result.runs.resize(points.size() * reps);
  parallel_for(result.runs.size(), parallelism, [&](std::size_t k) {
    const size_t point = k / reps;
    result.runs[k] = run_one(spec, set, static_cast<int>(point), static_cast<int>(k % reps), points[point], master_seed);
  });

  for (size_t p = 0; p < points.size(); ++p)
    result.points.push_back(summarise(spec, result.dim, result.settings, points[p], result.runs.data() + p * reps,
                                      spec.repetitions));
  return result;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string level_tag(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", level * 100.0);
  std::string s = buf;
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
}

std::string method_tag(DiagnosisMethod m) {
  switch (m) {
    case DiagnosisMethod::rank_counting: return "rank";
    case DiagnosisMethod::naive: return "naive";
    case DiagnosisMethod::monte_carlo: return "mc";
  }
  return "unknown";
}

}  // namespace

std::string runs_csv(const ExperimentResult& result) {
  const ExperimentSpec& spec = result.spec;
  std::ostringstream out;
  out << "point,index,seed,drift_ratio,target_p,target_purity,included,rank,chi_squared,fidelity,iterations";
  for (DiagnosisMethod m : spec.methods) {
    const std::string t = method_tag(m);
    out << ',' << t << "_dof," << t << "_q";
    for (double level : spec.diagnostics.confidence_levels) out << ',' << t << "_flag" << level_tag(level);
    if (m == DiagnosisMethod::monte_carlo) out << ",mc_p,mc_kappa_bar";
  }
  out << ",failure\n";

  for (const RunRecord& r : result.runs) {
    out << r.point << ',' << r.index << ',' << r.seed << ',' << num(r.drift_ratio) << ',' << num(r.target_p) << ','
        << num(r.target_purity) << ',' << (r.included ? 1 : 0) << ',';
    if (r.included)
      out << r.rank << ',' << num(r.chi_squared) << ',' << num(r.fidelity);
    else
      out << ",,";
    out << ',' << r.iterations;
    for (size_t m = 0; m < spec.methods.size(); ++m) {
      const size_t levels = spec.diagnostics.confidence_levels.size();
      const bool mc = spec.methods[m] == DiagnosisMethod::monte_carlo;
      if (!r.included) {
        out << std::string(2 + levels + (mc ? 2 : 0), ',');
        continue;
      }
      const MethodOutcome& o = r.outcomes[m];
      out << ',' << o.dof << ',' << (o.quality ? num(*o.quality) : "");
      for (bool f : o.flagged) out << ',' << (f ? 1 : 0);
      if (mc) out << ',' << (o.p_value ? num(*o.p_value) : "") << ',' << (o.kappa_bar ? num(*o.kappa_bar) : "");
    }
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    out << ',' << failure << '\n';
  }
  return out.str();
}

std::vector<PuritySweepPoint> werner_purity_sweep(const std::vector<std::string>& sets,
                                                  const std::vector<double>& p_grid,
                                                  const PuritySweepOptions& options) {
  if (sets.empty() || p_grid.empty()) throw DomainError("purity sweep needs at least one set and one p value");
  if (!(options.baseline_flux > 0.0) || options.reference_settings < 1)
    throw DomainError("purity sweep flux normalisation must be positive");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("purity sweep p values must lie in [0, 1]");

  std::vector<PuritySweepPoint> out;
  for (size_t s = 0; s < sets.size(); ++s) {
    const ProjectorSet set = named_set(sets[s]);
    for (double p : p_grid) {
      ExperimentSpec spec;
      spec.name = sets[s];
      spec.set = sets[s];
      spec.ensemble.dim = set.dim();
      spec.ensemble.kind = set.dim() == 4 ? EnsembleKind::werner_two_qubit : EnsembleKind::werner_like;
      spec.ensemble.p_min = p;
      spec.ensemble.p_max = p;
      spec.mean_flux = options.baseline_flux * options.reference_settings / static_cast<double>(set.size());
      spec.repetitions = options.repetitions;
      spec.methods = {DiagnosisMethod::rank_counting};
      spec.diagnostics = options.diagnostics;

      // Same seed across p, so each curve reuses its target orientations.
      const ExperimentResult r = run_experiment(spec, options.parallelism, derive_seed(options.seed, s));
      const EnsembleSummary& summary = r.points.front();
      out.push_back({sets[s], set.size(), p, spec.mean_flux, summary.included, summary.mean_chi_squared,
                     summary.sd_chi_squared, summary.full_rank_fraction, summary.mean_fidelity});
    }
  }
  return out;
}

std::string purity_sweep_csv(const std::vector<PuritySweepPoint>& points) {
  std::ostringstream out;
  out << "set,settings,p,mean_flux,included,mean_chi_squared,sd_chi_squared,full_rank_fraction,mean_fidelity\n";
  for (const auto& p : points)
    out << p.set << ',' << p.settings << ',' << num(p.p) << ',' << num(p.mean_flux) << ',' << p.included << ','
        << num(p.mean_chi_squared) << ',' << num(p.sd_chi_squared) << ',' << num(p.full_rank_fraction) << ','
        << num(p.mean_fidelity) << '\n';
  return out.str();
}

}  // namespace qtomo
