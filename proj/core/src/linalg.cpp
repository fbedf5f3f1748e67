#include "qtomo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtomo/error.hpp"

namespace qtomo {

double hermiticity_defect(const ComplexMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) return INFINITY;
  const double scale = 1.0 + matrix.cwiseAbs().maxCoeff();
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() / scale;
}

bool is_hermitian(const ComplexMatrix& matrix, double tolerance) {
  return matrix.size() > 0 && hermiticity_defect(matrix) <= tolerance;
}

ComplexMatrix hermitian_part(const ComplexMatrix& matrix) {
  return 0.5 * (matrix + matrix.adjoint());
}

namespace {

void fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Small slack so that numerically tied components resolve to the first one.
    if (std::abs(v[i]) > best * (1.0 + 1e-12)) {
      best = std::abs(v[i]);
      pivot = i;
    }
  }
  if (best > 0.0) v *= std::conj(v[pivot]) / best;
}

}  // namespace

HermitianEigen eig_hermitian(const ComplexMatrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.size() == 0)
    throw DomainError("eig_hermitian: matrix must be square and non-empty");
  const double defect = hermiticity_defect(matrix);
  if (defect > kHermitianTolerance)
    throw DomainError("eig_hermitian: matrix is not Hermitian (defect " + std::to_string(defect) + ")");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(matrix));
  if (solver.info() != Eigen::Success) throw ConvergenceError("eig_hermitian: eigensolver failed");

  const Eigen::Index n = matrix.rows();
  HermitianEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) fix_phase(out.vectors.col(k));
  return out;
}

RealVector eigenvalues_hermitian(const ComplexMatrix& matrix) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

RealMatrix pseudoinverse(const RealMatrix& matrix) {
  if (matrix.size() == 0) return RealMatrix(matrix.cols(), matrix.rows());
  Eigen::JacobiSVD<RealMatrix> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sigma = svd.singularValues();
  const double cutoff = 1e-12 * (sigma.size() > 0 ? sigma[0] : 0.0);
  RealVector inv = RealVector::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > cutoff && sigma[i] > 0.0) inv[i] = 1.0 / sigma[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const RealMatrix& matrix, double relative_cutoff) {
  if (matrix.size() == 0) return 0;
  Eigen::JacobiSVD<RealMatrix> svd(matrix);
  const RealVector& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > relative_cutoff * sigma[0]) ++rank;
  return rank;
}

std::vector<ComplexVector> gram_schmidt(const std::vector<ComplexVector>& vectors) {
  std::vector<ComplexVector> basis;
  basis.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!basis.empty() && v.size() != basis.front().size())
      throw DomainError("gram_schmidt: vectors differ in length");
    const double original = v.norm();
    ComplexVector r = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) r -= q.dot(r) * q;
    const double residual = r.norm();
    if (original == 0.0 || residual < 1e-12 * original)
      throw DomainError("gram_schmidt: input vectors are linearly dependent");
    basis.push_back(r / residual);
  }
  return basis;
}

ComplexMatrix project_psd(const ComplexMatrix& matrix) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix);
  const RealVector clipped = solver.eigenvalues().cwiseMax(0.0);
  const ComplexMatrix& v = solver.eigenvectors();
  return v * clipped.cast<Complex>().asDiagonal() * v.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

OperatorBasis::OperatorBasis(int dim, std::vector<ComplexMatrix> elements)
    : dim_(dim), elements_(std::move(elements)) {
  if (static_cast<int>(elements_.size()) != dim * dim)
    throw DomainError("OperatorBasis: expected d^2 elements");
  for (const auto& e : elements_)
    if (e.rows() != dim || e.cols() != dim || !is_hermitian(e))
      throw DomainError("OperatorBasis: elements must be d x d Hermitian");
}

RealVector OperatorBasis::coordinates(const ComplexMatrix& hermitian) const {
  RealVector c(size());
  // Tr[O A] = sum_ij O_ij A_ji; O Hermitian so this equals sum conj(O_ji) A_ji.
  for (int k = 0; k < size(); ++k) c[k] = elements_[static_cast<size_t>(k)].cwiseProduct(hermitian.transpose()).sum().real();
  return c;
}

ComplexMatrix OperatorBasis::compose(const RealVector& coefficients) const {
  if (coefficients.size() != size()) throw DomainError("OperatorBasis::compose: wrong coefficient count");
  ComplexMatrix out = ComplexMatrix::Zero(dim_, dim_);
  for (int k = 0; k < size(); ++k) out += coefficients[k] * elements_[static_cast<size_t>(k)];
  return out;
}

OperatorBasis hermitian_basis(int dim) {
  if (dim < 2) throw DomainError("hermitian_basis: dimension must be at least 2");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const Complex i_unit(0.0, 1.0);
  std::vector<ComplexMatrix> elements;
  elements.reserve(static_cast<size_t>(dim * dim));

  elements.push_back(ComplexMatrix::Identity(dim, dim) / std::sqrt(static_cast<double>(dim)));
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      ComplexMatrix sym = ComplexMatrix::Zero(dim, dim);
      sym(j, k) = inv_sqrt2;
      sym(k, j) = inv_sqrt2;
      elements.push_back(std::move(sym));
      ComplexMatrix anti = ComplexMatrix::Zero(dim, dim);
      anti(j, k) = -i_unit * inv_sqrt2;
      anti(k, j) = i_unit * inv_sqrt2;
      elements.push_back(std::move(anti));
    }
  }
  for (int l = 1; l < dim; ++l) {
    ComplexMatrix diag = ComplexMatrix::Zero(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int m = 0; m < l; ++m) diag(m, m) = norm;
    diag(l, l) = -static_cast<double>(l) * norm;
    elements.push_back(std::move(diag));
  }
  return OperatorBasis(dim, std::move(elements));
}

}  // namespace qtomo
