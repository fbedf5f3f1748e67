#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtomo/measurement.hpp"
#include "qtomo/random.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

/// Sinusoidal source-brightness drift, applied per setting in acquisition order.
struct NoiseConfig {
  double drift_ratio = 0.0;    // amplitude relative to the mean Poissonian scale 1/sqrt(nbar)
  double drift_period = 9.5;   // in count settings
  std::optional<double> drift_phase;  // radians in [0, 2pi); empty means uniform random per dataset

  void validate() const;
};

struct Provenance {
  std::optional<std::uint64_t> seed;
  double drift_ratio = 0.0;
  double drift_period = 0.0;
  std::optional<double> drift_phase;
  std::string generator;
};

/// Measured counts for one tomography. `mean_flux` and `provenance` are
/// absent for imported experimental data.
struct CountDataset {
  ProjectorSet set;
  std::vector<std::int64_t> counts;
  std::optional<double> mean_flux;
  std::optional<Provenance> provenance;

  int dim() const { return set.dim(); }
  double total_counts() const;
  /// Throws DomainError unless counts match the set and are all non-negative.
  void validate() const;
};

/// n_j = Tr[P_j rho_bar] for an unnormalised state.
std::vector<double> expected_counts(const DensityMatrix& unnormalised, const ProjectorSet& set);
std::vector<double> expected_counts(const ComplexMatrix& hermitian, const ProjectorSet& set);

/// Fractional drift amplitude A = r / sqrt(mean_j n_j).
double drift_amplitude(const std::vector<double>& expected, double drift_ratio);

/// n_j (1 + A sin(2 pi j / T + phase)), clamped at zero. Throws DomainError if A >= 1.
std::vector<double> apply_drift(const std::vector<double>& expected, double drift_ratio, double period,
                                double phase);
/// As above, drawing the phase from `rng` when the config leaves it unset.
/// The phase actually used is written to `resolved_phase` when non-null.
std::vector<double> apply_drift(const std::vector<double>& expected, const NoiseConfig& config, Rng& rng,
                                double* resolved_phase = nullptr);

/// One Poisson(lambda) variate: multiplicative exponential-gap inversion for
/// lambda < 30, Hormann's transformed rejection (PTRS) above.
std::int64_t sample_poisson(double lambda, Rng& rng);
std::vector<std::int64_t> sample_poisson_counts(const std::vector<double>& expected, Rng& rng);

/// expected_counts(mean_flux * state) -> apply_drift -> sample_poisson_counts.
CountDataset simulate_dataset(const DensityMatrix& state, const ProjectorSet& set, double mean_flux,
                              const NoiseConfig& config, Rng& rng);

}  // namespace qtomo
