#pragma once

// Small dense complex linear algebra for tomography-sized problems (d <= 16).

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qtomo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;

/// Largest elementwise |A - A^dagger| relative to 1 + max|A|.
double hermiticity_defect(const ComplexMatrix& matrix);

bool is_hermitian(const ComplexMatrix& matrix, double tolerance = kHermitianTolerance);

/// (A + A^dagger) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& matrix);

struct HermitianEigen {
  RealVector values;      // descending
  ComplexMatrix vectors;  // column k pairs with values[k]
};

/// Eigendecomposition of a Hermitian matrix. Eigenvalues come back in
/// descending order; each eigenvector is phase-fixed so that its
/// largest-magnitude component (first one on ties) is real and positive.
/// Throws DomainError when the input is not Hermitian within tolerance.
HermitianEigen eig_hermitian(const ComplexMatrix& matrix);

/// Eigenvalues only, descending. No Hermiticity check; the lower triangle is used.
RealVector eigenvalues_hermitian(const ComplexMatrix& matrix);

/// Moore-Penrose pseudoinverse. Singular values below 1e-12 * sigma_max are
/// treated as zero.
RealMatrix pseudoinverse(const RealMatrix& matrix);

/// Numerical rank with singular values above `relative_cutoff * sigma_max`.
int numerical_rank(const RealMatrix& matrix, double relative_cutoff = 1e-10);

/// Modified Gram-Schmidt with one re-orthogonalisation pass.
/// Throws DomainError if any residual norm falls below 1e-12 of the input norm.
std::vector<ComplexVector> gram_schmidt(const std::vector<ComplexVector>& vectors);

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues clipped).
ComplexMatrix project_psd(const ComplexMatrix& matrix);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector kron(const ComplexVector& a, const ComplexVector& b);

/// Trace-orthonormal basis of d x d Hermitian operators.
class OperatorBasis {
 public:
  OperatorBasis(int dim, std::vector<ComplexMatrix> elements);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const ComplexMatrix& operator[](int k) const { return elements_[static_cast<size_t>(k)]; }
  const std::vector<ComplexMatrix>& elements() const { return elements_; }

  /// Real coordinates Tr[O_k A] of a Hermitian operator.
  RealVector coordinates(const ComplexMatrix& hermitian) const;

  /// sum_k coefficients[k] O_k.
  ComplexMatrix compose(const RealVector& coefficients) const;

 private:
  int dim_;
  std::vector<ComplexMatrix> elements_;
};

/// Generalised Gell-Mann basis: I/sqrt(d) first, then symmetric and
/// antisymmetric off-diagonal elements for each pair j < k, then the d - 1
/// traceless diagonal elements. For d = 2 this is {I, X, Y, Z}/sqrt(2).
OperatorBasis hermitian_basis(int dim);

}  // namespace qtomo
