#include "qtomo/states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qtomo/error.hpp"

namespace qtomo {

DensityMatrix::DensityMatrix(const ComplexMatrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
    throw DomainError("DensityMatrix: matrix must be square and non-empty");
  if (!is_hermitian(matrix)) throw DomainError("DensityMatrix: matrix is not Hermitian");
  matrix_ = hermitian_part(matrix);
  trace_ = matrix_.trace().real();
  if (!(trace_ > 0.0)) throw DomainError("DensityMatrix: trace must be positive");
  const double min_eig = eigenvalues_hermitian(matrix_).minCoeff();
  if (min_eig < -1e-9 * trace_) throw DomainError("DensityMatrix: matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::normalized() const { return DensityMatrix(matrix_ / trace_); }

DensityMatrix DensityMatrix::scaled(double factor) const { return DensityMatrix(matrix_ * factor); }

RealVector DensityMatrix::eigenvalues() const { return eigenvalues_hermitian(matrix_); }

DensityMatrix maximally_mixed(int dim) {
  if (dim < 1) throw DomainError("maximally_mixed: dimension must be positive");
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix pure_state(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw DomainError("pure_state: zero vector");
  const ComplexVector v = psi / norm;
  return DensityMatrix(v * v.adjoint());
}

ComplexVector haar_vector(int dim, Rng& rng) {
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = Complex(re, im);
  }
  return v / v.norm();
}

ComplexMatrix haar_unitary(int dim, Rng& rng) {
  ComplexMatrix z(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

DensityMatrix haar_pure(int dim, Rng& rng) {
  if (dim < 2) throw DomainError("haar_pure: dimension must be at least 2");
  return pure_state(haar_vector(dim, rng));
}

namespace {

void check_mixing(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("mixing parameter p must lie in [0, 1]");
}

DensityMatrix mix_with_identity(const ComplexVector& psi, double p) {
  const auto d = psi.size();
  ComplexMatrix m = p * (psi * psi.adjoint());
  m += (1.0 - p) / static_cast<double>(d) * ComplexMatrix::Identity(d, d);
  return DensityMatrix(m);
}

}  // namespace

DensityMatrix werner_like(int dim, double p, Rng& rng) {
  check_mixing(p);
  if (dim < 2) throw DomainError("werner_like: dimension must be at least 2");
  return mix_with_identity(haar_vector(dim, rng), p);
}

DensityMatrix werner_two_qubit(double p, Rng& rng) {
  check_mixing(p);
  ComplexVector bell = ComplexVector::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  const ComplexMatrix ua = haar_unitary(2, rng);
  const ComplexMatrix ub = haar_unitary(2, rng);
  return mix_with_identity(kron(ua, ub) * bell, p);
}

DensityMatrix rank_biased_random(int dim, Rng& rng) {
  if (dim < 2) throw DomainError("rank_biased_random: dimension must be at least 2");
  const int rank = 1 + static_cast<int>(rng.uniform() * dim);
  RealVector weights(rank);
  for (int i = 0; i < rank; ++i) weights[i] = rng.exponential();
  weights /= weights.sum();

  std::vector<ComplexVector> raw;
  raw.reserve(static_cast<size_t>(rank));
  for (int i = 0; i < rank; ++i) raw.push_back(haar_vector(dim, rng));
  const auto basis = gram_schmidt(raw);

  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < rank; ++i) m += weights[i] * (basis[static_cast<size_t>(i)] * basis[static_cast<size_t>(i)].adjoint());
  return DensityMatrix(m / m.trace().real());
}

double purity(const DensityMatrix& state) {
  const ComplexMatrix rho = state.matrix() / state.trace();
  return (rho * rho).trace().real();
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("fidelity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> ea(a.matrix() / a.trace());
  const RealVector root = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix sqrt_a = ea.eigenvectors() * root.cast<Complex>().asDiagonal() * ea.eigenvectors().adjoint();
  const ComplexMatrix inner = hermitian_part(sqrt_a * (b.matrix() / b.trace()) * sqrt_a);
  const double root_sum = eigenvalues_hermitian(inner).cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

int effective_rank(const ComplexMatrix& unnormalised, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("effective_rank: threshold must be positive");
  const double trace = unnormalised.trace().real();
  if (!(trace > 0.0)) return 0;
  const RealVector values = eigenvalues_hermitian(unnormalised) / trace;
  int rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] > threshold) ++rank;
  return rank;
}

int effective_rank(const DensityMatrix& state, double threshold) {
  return effective_rank(state.matrix(), threshold);
}

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::werner_like: return "werner_like";
    case EnsembleKind::werner_two_qubit: return "werner_two_qubit";
    case EnsembleKind::rank_biased: return "rank_biased";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  if (name == "werner_like") return EnsembleKind::werner_like;
  if (name == "werner_two_qubit" || name == "werner") return EnsembleKind::werner_two_qubit;
  if (name == "rank_biased") return EnsembleKind::rank_biased;
  throw DomainError("unknown ensemble kind '" + name + "'");
}

void StateEnsembleSpec::validate() const {
  if (!(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max))
    throw DomainError("ensemble p_range must be an interval within [0, 1]");
  if (count < 1) throw DomainError("ensemble count must be at least 1");
  if (dim < 2) throw DomainError("ensemble dimension must be at least 2");
  if (kind == EnsembleKind::werner_two_qubit && dim != 4)
    throw DomainError("werner_two_qubit ensemble has dimension 4");
}

EnsembleDraw draw_state(const StateEnsembleSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case EnsembleKind::werner_like: {
      const double p = spec.p_min + (spec.p_max - spec.p_min) * rng.uniform();
      return {werner_like(spec.dim, p, rng), p};
    }
    case EnsembleKind::werner_two_qubit: {
      const double p = spec.p_min + (spec.p_max - spec.p_min) * rng.uniform();
      return {werner_two_qubit(p, rng), p};
    }
    case EnsembleKind::rank_biased:
      return {rank_biased_random(spec.dim, rng), std::numeric_limits<double>::quiet_NaN()};
  }
  throw DomainError("draw_state: unknown ensemble kind");
}

}  // namespace qtomo
