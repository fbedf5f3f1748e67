#include "qtomo/simulation.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "qtomo/error.hpp"
#include "qtomo/version.hpp"

namespace qtomo {

void NoiseConfig::validate() const {
  if (!(drift_ratio >= 0.0)) throw DomainError("drift ratio must be non-negative");
  if (!(drift_period > 0.0)) throw DomainError("drift period must be positive");
  if (drift_phase && !(*drift_phase >= 0.0 && *drift_phase < 2.0 * std::numbers::pi))
    throw DomainError("drift phase must lie in [0, 2pi)");
}

double CountDataset::total_counts() const {
  return static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
}

void CountDataset::validate() const {
  if (static_cast<int>(counts.size()) != set.size())
    throw DomainError("dataset has " + std::to_string(counts.size()) + " counts for a set of " +
                      std::to_string(set.size()) + " projectors");
  for (auto n : counts)
    if (n < 0) throw DomainError("counts must be non-negative");
}

std::vector<double> expected_counts(const ComplexMatrix& hermitian, const ProjectorSet& set) {
  if (hermitian.rows() != set.dim() || hermitian.cols() != set.dim())
    throw DomainError("expected_counts: state dimension does not match the projector set");
  std::vector<double> n(static_cast<size_t>(set.size()));
  for (int j = 0; j < set.size(); ++j) n[static_cast<size_t>(j)] = set.expectation(j, hermitian);
  return n;
}

std::vector<double> expected_counts(const DensityMatrix& unnormalised, const ProjectorSet& set) {
  return expected_counts(unnormalised.matrix(), set);
}

double drift_amplitude(const std::vector<double>& expected, double drift_ratio) {
  if (drift_ratio == 0.0 || expected.empty()) return 0.0;
  const double mean = std::accumulate(expected.begin(), expected.end(), 0.0) / static_cast<double>(expected.size());
  if (!(mean > 0.0)) throw DomainError("apply_drift: mean expected count must be positive");
  return drift_ratio / std::sqrt(mean);
}

std::vector<double> apply_drift(const std::vector<double>& expected, double drift_ratio, double period,
                                double phase) {
  for (double n : expected)
    if (n < 0.0) throw DomainError("apply_drift: expected counts must be non-negative");
  if (!(period > 0.0)) throw DomainError("apply_drift: period must be positive");
  const double amplitude = drift_amplitude(expected, drift_ratio);
  if (amplitude == 0.0) return expected;
  if (amplitude >= 1.0) throw DomainError("apply_drift: fractional drift amplitude must be below 1");

  std::vector<double> out(expected.size());
  for (size_t j = 0; j < expected.size(); ++j) {
    const double modulation = 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / period + phase);
    out[j] = std::max(0.0, expected[j] * modulation);
  }
  return out;
}

std::vector<double> apply_drift(const std::vector<double>& expected, const NoiseConfig& config, Rng& rng,
                                double* resolved_phase) {
  config.validate();
  const double phase = config.drift_phase ? *config.drift_phase : 2.0 * std::numbers::pi * rng.uniform();
  if (resolved_phase) *resolved_phase = phase;
  return apply_drift(expected, config.drift_ratio, config.drift_period, phase);
}

std::int64_t sample_poisson(double lambda, Rng& rng) {
  if (!(lambda >= 0.0)) throw DomainError("sample_poisson: mean must be non-negative");
  if (lambda == 0.0) return 0;
  if (lambda < 30.0) {
    // Count unit-rate arrivals in [0, lambda]: multiply uniforms until below e^-lambda.
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double product = rng.uniform_open();
    while (product > limit) {
      ++k;
      product *= rng.uniform_open();
    }
    return k;
  }

  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::int64_t>(k);
  }
}

std::vector<std::int64_t> sample_poisson_counts(const std::vector<double>& expected, Rng& rng) {
  std::vector<std::int64_t> counts(expected.size());
  for (size_t j = 0; j < expected.size(); ++j) counts[j] = sample_poisson(expected[j], rng);
  return counts;
}

CountDataset simulate_dataset(const DensityMatrix& state, const ProjectorSet& set, double mean_flux,
                              const NoiseConfig& config, Rng& rng) {
  if (!(mean_flux > 0.0)) throw DomainError("simulate_dataset: mean flux must be positive");
  if (state.dim() != set.dim()) throw DomainError("simulate_dataset: state dimension does not match the set");
  config.validate();

  std::vector<double> n = expected_counts(state.matrix() * (mean_flux / state.trace()), set);
  // Rounding can leave values of order -1e-13 for projectors orthogonal to the state.
  for (double& x : n) x = std::max(x, 0.0);

  double phase = 0.0;
  const std::vector<double> drifted = apply_drift(n, config, rng, &phase);

  CountDataset dataset{set, sample_poisson_counts(drifted, rng), mean_flux, Provenance{}};
  Provenance& p = *dataset.provenance;
  p.seed = rng.seed();
  p.drift_ratio = config.drift_ratio;
  p.drift_period = config.drift_period;
  p.drift_phase = phase;
  p.generator = std::string("qtomo ") + kVersion;
  return dataset;
}

}  // namespace qtomo
