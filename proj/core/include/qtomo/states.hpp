#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "qtomo/linalg.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

inline constexpr double kDefaultRankThreshold = 1e-6;

/// Hermitian positive semidefinite matrix with positive trace. The trace is 1
/// for a normalised state and the brightness estimate for an unnormalised one.
class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12 relative), positivity (min eigenvalue >=
  /// -1e-9 * trace) and trace > 0; stores the exact Hermitian part.
  explicit DensityMatrix(const ComplexMatrix& matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }
  double trace() const { return trace_; }

  DensityMatrix normalized() const;
  DensityMatrix scaled(double factor) const;

  /// Eigenvalues of the matrix as stored (not normalised), descending.
  RealVector eigenvalues() const;

 private:
  ComplexMatrix matrix_;
  double trace_;
};

DensityMatrix maximally_mixed(int dim);
DensityMatrix pure_state(const ComplexVector& psi);

/// Normalised vector of i.i.d. standard complex Gaussians (Haar-distributed).
ComplexVector haar_vector(int dim, Rng& rng);
/// Haar-random unitary via QR of a complex Ginibre matrix with R's phases removed.
ComplexMatrix haar_unitary(int dim, Rng& rng);

DensityMatrix haar_pure(int dim, Rng& rng);
/// p |psi><psi| + (1 - p) I/d with Haar-random |psi>.
DensityMatrix werner_like(int dim, double p, Rng& rng);
/// p |psi><psi| + (1 - p) I/4 with |psi> = (U_A x U_B)|Phi+>, U_A, U_B Haar.
DensityMatrix werner_two_qubit(double p, Rng& rng);
/// Rank l uniform on 1..d, flat-Dirichlet spectrum on l eigenvalues,
/// Gram-Schmidt-orthogonalised Haar eigenvectors.
DensityMatrix rank_biased_random(int dim, Rng& rng);

/// Tr[rho^2] of the normalised state.
double purity(const DensityMatrix& state);
/// (Tr sqrt(sqrt(a) b sqrt(a)))^2 of the normalised arguments.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);
/// Number of eigenvalues of the trace-normalised matrix strictly above threshold.
int effective_rank(const DensityMatrix& state, double threshold = kDefaultRankThreshold);
int effective_rank(const ComplexMatrix& unnormalised, double threshold = kDefaultRankThreshold);

enum class EnsembleKind { werner_like, werner_two_qubit, rank_biased };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

struct StateEnsembleSpec {
  EnsembleKind kind = EnsembleKind::werner_like;
  int dim = 2;
  double p_min = 1.0 / 3.0;
  double p_max = 2.0 / 3.0;
  int count = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EnsembleDraw {
  DensityMatrix state;
  double p;  // mixing parameter used, or NaN for rank_biased
};

/// One state from the ensemble using the supplied stream.
EnsembleDraw draw_state(const StateEnsembleSpec& spec, Rng& rng);

}  // namespace qtomo
