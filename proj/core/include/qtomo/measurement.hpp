#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qtomo/linalg.hpp"

namespace qtomo {

/// Ordered list of rank-1 projectors P_j = |v_j><v_j| plus the coefficient
/// matrix q_jk = Tr[O_k P_j] against hermitian_basis(dim). Immutable; copies
/// share storage.
class ProjectorSet {
 public:
  /// From unit (or normalisable) state vectors, one per setting.
  ProjectorSet(int dim, std::vector<ComplexVector> states, std::vector<std::string> labels,
               std::string name = {});

  /// From projector matrices; each must be Hermitian with spectrum {1, 0, ..., 0}
  /// within 1e-10.
  static ProjectorSet from_projectors(int dim, const std::vector<ComplexMatrix>& projectors,
                                      std::vector<std::string> labels, std::string name = {});

  int dim() const { return data_->dim; }
  int size() const { return static_cast<int>(data_->states.size()); }
  const std::string& name() const { return data_->name; }
  const std::vector<std::string>& labels() const { return data_->labels; }
  const std::vector<ComplexVector>& states() const { return data_->states; }
  const std::vector<ComplexMatrix>& projectors() const { return data_->projectors; }
  /// M x d^2 real matrix q.
  const RealMatrix& coefficients() const { return data_->coefficients; }
  const OperatorBasis& basis() const { return data_->basis; }
  /// pinv(q), computed on first use and shared between copies.
  const RealMatrix& inversion_matrix() const;
  /// Rank of q with singular values above 1e-10 * sigma_max (cached like the inverse).
  int coefficient_rank() const;

  /// Re <v_j| A |v_j> = Tr[P_j A] for Hermitian A.
  double expectation(int j, const ComplexMatrix& hermitian) const;

 private:
  struct Data {
    Data(int d, std::vector<ComplexVector> s, std::vector<ComplexMatrix> p, std::vector<std::string> l,
         std::string n, OperatorBasis b, RealMatrix q)
        : dim(d), states(std::move(s)), projectors(std::move(p)), labels(std::move(l)), name(std::move(n)),
          basis(std::move(b)), coefficients(std::move(q)) {}
    int dim;
    std::vector<ComplexVector> states;
    std::vector<ComplexMatrix> projectors;
    std::vector<std::string> labels;
    std::string name;
    OperatorBasis basis;
    RealMatrix coefficients;
    mutable std::once_flag inversion_once;
    mutable RealMatrix inversion;
    mutable int rank = 0;
  };
  explicit ProjectorSet(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  void ensure_inversion() const;
  std::shared_ptr<const Data> data_;
};

enum class Solid { tetrahedron, cube, octahedron, dodecahedron, icosahedron };

std::string to_string(Solid solid);
Solid solid_from_string(const std::string& name);

/// Single-qubit projectors (I + r.sigma)/2 for the unit face normals of a
/// platonic solid: 4, 6, 8, 12 and 20 settings. The cube set is ordered
/// +z, -z, +x, -x, +y, -y.
ProjectorSet platonic_set(Solid solid);

/// Kronecker products of the member sets in lexicographic order (first set
/// varies slowest). Labels are joined with U+2297.
ProjectorSet tensor_product_set(const std::vector<ProjectorSet>& sets);

/// The d computational-basis projectors followed by, for each pair i < j,
/// (|i> + |j>)/sqrt2, (|i> - |j>)/sqrt2, (|i> + i|j>)/sqrt2, (|i> - i|j>)/sqrt2.
ProjectorSet qudit_cube_set(int dim);

enum class CompletenessClass { incomplete, minimal, overcomplete };

std::string to_string(CompletenessClass c);

/// Rank of q with singular-value cutoff 1e-10 (relative) against d^2.
CompletenessClass classify_completeness(const ProjectorSet& set);

/// Resolve a set expression: a solid name, `name^n` for tensor powers, or
/// `quditcube:d`. Throws DomainError on anything else.
ProjectorSet named_set(const std::string& expression);

/// Expressions listed by `qtomo sets list`.
std::vector<std::string> catalogue_names();

}  // namespace qtomo
