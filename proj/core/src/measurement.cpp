#include "qtomo/measurement.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

RealMatrix coefficient_matrix(const OperatorBasis& basis, const std::vector<ComplexMatrix>& projectors) {
  RealMatrix q(static_cast<Eigen::Index>(projectors.size()), basis.size());
  for (size_t j = 0; j < projectors.size(); ++j)
    q.row(static_cast<Eigen::Index>(j)) = basis.coordinates(projectors[j]).transpose();
  return q;
}

}  // namespace

ProjectorSet::ProjectorSet(int dim, std::vector<ComplexVector> states, std::vector<std::string> labels,
                           std::string name)
    : data_(nullptr) {
  if (dim < 2) throw DomainError("ProjectorSet: dimension must be at least 2");
  if (states.empty()) throw DomainError("ProjectorSet: at least one projector required");
  if (labels.empty()) {
    for (size_t j = 0; j < states.size(); ++j) labels.push_back("P" + std::to_string(j));
  }
  if (labels.size() != states.size()) throw DomainError("ProjectorSet: label count must match projector count");

  std::vector<ComplexMatrix> projectors;
  projectors.reserve(states.size());
  for (auto& v : states) {
    if (v.size() != dim) throw DomainError("ProjectorSet: state vector has wrong dimension");
    const double norm = v.norm();
    if (!(norm > 0.0)) throw DomainError("ProjectorSet: zero state vector");
    v /= norm;
    projectors.push_back(v * v.adjoint());
  }
  OperatorBasis basis = hermitian_basis(dim);
  RealMatrix q = coefficient_matrix(basis, projectors);
  data_ = std::make_shared<const Data>(dim, std::move(states), std::move(projectors), std::move(labels),
                                      std::move(name), std::move(basis), std::move(q));
}

ProjectorSet ProjectorSet::from_projectors(int dim, const std::vector<ComplexMatrix>& projectors,
                                           std::vector<std::string> labels, std::string name) {
  std::vector<ComplexVector> states;
  states.reserve(projectors.size());
  for (const auto& p : projectors) {
    if (p.rows() != dim || p.cols() != dim) throw DomainError("projector has wrong dimension");
    if (hermiticity_defect(p) > 1e-10) throw DomainError("projector is not Hermitian");
    const HermitianEigen e = eig_hermitian(hermitian_part(p));
    if (std::abs(e.values[0] - 1.0) > 1e-10) throw DomainError("projector must be rank one with unit trace");
    for (Eigen::Index k = 1; k < e.values.size(); ++k)
      if (std::abs(e.values[k]) > 1e-10) throw DomainError("projector must be rank one with unit trace");
    states.push_back(e.vectors.col(0));
  }
  return ProjectorSet(dim, std::move(states), std::move(labels), std::move(name));
}

void ProjectorSet::ensure_inversion() const {
  std::call_once(data_->inversion_once, [this] {
    data_->inversion = pseudoinverse(data_->coefficients);
    data_->rank = numerical_rank(data_->coefficients, 1e-10);
  });
}

const RealMatrix& ProjectorSet::inversion_matrix() const {
  ensure_inversion();
  return data_->inversion;
}

int ProjectorSet::coefficient_rank() const {
  ensure_inversion();
  return data_->rank;
}

double ProjectorSet::expectation(int j, const ComplexMatrix& hermitian) const {
  const ComplexVector& v = data_->states[static_cast<size_t>(j)];
  return v.dot(hermitian * v).real();
}

std::string to_string(Solid solid) {
  switch (solid) {
    case Solid::tetrahedron: return "tetrahedron";
    case Solid::cube: return "cube";
    case Solid::octahedron: return "octahedron";
    case Solid::dodecahedron: return "dodecahedron";
    case Solid::icosahedron: return "icosahedron";
  }
  return "unknown";
}

Solid solid_from_string(const std::string& name) {
  for (Solid s : {Solid::tetrahedron, Solid::cube, Solid::octahedron, Solid::dodecahedron, Solid::icosahedron})
    if (to_string(s) == name) return s;
  throw DomainError("unknown platonic solid '" + name + "'");
}

namespace {

using Direction = std::array<double, 3>;

std::vector<Direction> face_normals(Solid solid) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double iphi = 1.0 / phi;
  switch (solid) {
    case Solid::tetrahedron:
      return {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    case Solid::cube:
      return {{0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
    case Solid::octahedron:
      return {{1, 1, 1},  {-1, -1, -1}, {1, 1, -1}, {-1, -1, 1},
              {1, -1, 1}, {-1, 1, -1},  {-1, 1, 1}, {1, -1, -1}};
    case Solid::dodecahedron:  // icosahedron vertices
      return {{0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},  {0, -1, phi},
              {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},  {-1, phi, 0},
              {phi, 0, 1},  {-phi, 0, -1}, {phi, 0, -1},  {-phi, 0, 1}};
    case Solid::icosahedron: {  // dodecahedron vertices
      std::vector<Direction> dirs = {{1, 1, 1},  {-1, -1, -1}, {1, 1, -1}, {-1, -1, 1},
                                     {1, -1, 1}, {-1, 1, -1},  {-1, 1, 1}, {1, -1, -1}};
      const std::vector<Direction> rest = {
          {0, iphi, phi},  {0, -iphi, -phi}, {0, iphi, -phi},  {0, -iphi, phi},
          {iphi, phi, 0},  {-iphi, -phi, 0}, {iphi, -phi, 0},  {-iphi, phi, 0},
          {phi, 0, iphi},  {-phi, 0, -iphi}, {phi, 0, -iphi},  {-phi, 0, iphi}};
      dirs.insert(dirs.end(), rest.begin(), rest.end());
      return dirs;
    }
  }
  throw DomainError("unknown solid");
}

// Pure state with Bloch vector r (|r| = 1).
ComplexVector bloch_state(const Direction& r) {
  ComplexVector v(2);
  if (r[2] <= -1.0 + 1e-15) {
    v << 0.0, 1.0;
    return v;
  }
  const double c = std::sqrt((1.0 + r[2]) / 2.0);
  v << c, Complex(r[0], r[1]) / std::sqrt(2.0 * (1.0 + r[2]));
  return v;
}

}  // namespace

ProjectorSet platonic_set(Solid solid) {
  const auto normals = face_normals(solid);
  std::vector<ComplexVector> states;
  std::vector<std::string> labels;
  for (size_t j = 0; j < normals.size(); ++j) {
    Direction r = normals[j];
    const double norm = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    for (double& x : r) x /= norm;
    states.push_back(bloch_state(r));
    labels.push_back(to_string(solid) + std::to_string(j));
  }
  return ProjectorSet(2, std::move(states), std::move(labels), to_string(solid));
}

ProjectorSet tensor_product_set(const std::vector<ProjectorSet>& sets) {
  if (sets.empty()) throw DomainError("tensor_product_set: at least one set required");
  if (sets.size() == 1) return sets.front();

  std::vector<ComplexVector> states = sets.front().states();
  std::vector<std::string> labels = sets.front().labels();
  int dim = sets.front().dim();
  bool same_name = !sets.front().name().empty();
  for (size_t s = 1; s < sets.size(); ++s) {
    const ProjectorSet& next = sets[s];
    same_name = same_name && next.name() == sets.front().name();
    std::vector<ComplexVector> new_states;
    std::vector<std::string> new_labels;
    for (size_t a = 0; a < states.size(); ++a)
      for (int b = 0; b < next.size(); ++b) {
        new_states.push_back(kron(states[a], next.states()[static_cast<size_t>(b)]));
        new_labels.push_back(labels[a] + "⊗" + next.labels()[static_cast<size_t>(b)]);
      }
    states = std::move(new_states);
    labels = std::move(new_labels);
    dim *= next.dim();
  }
  std::string name;
  if (same_name) name = sets.front().name() + "^" + std::to_string(sets.size());
  return ProjectorSet(dim, std::move(states), std::move(labels), std::move(name));
}

ProjectorSet qudit_cube_set(int dim) {
  if (dim < 2) throw DomainError("qudit_cube_set: dimension must be at least 2");
  std::vector<ComplexVector> states;
  std::vector<std::string> labels;
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim; ++i) {
    ComplexVector v = ComplexVector::Zero(dim);
    v[i] = 1.0;
    states.push_back(v);
    labels.push_back("|" + std::to_string(i) + ">");
  }
  const std::array<Complex, 4> phases = {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)};
  const std::array<const char*, 4> signs = {"+", "-", "+i", "-i"};
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      for (size_t k = 0; k < phases.size(); ++k) {
        ComplexVector v = ComplexVector::Zero(dim);
        v[i] = s;
        v[j] = s * phases[k];
        states.push_back(v);
        labels.push_back("|" + std::to_string(i) + ">" + signs[k] + "|" + std::to_string(j) + ">");
      }
  return ProjectorSet(dim, std::move(states), std::move(labels), "quditcube:" + std::to_string(dim));
}

std::string to_string(CompletenessClass c) {
  switch (c) {
    case CompletenessClass::incomplete: return "incomplete";
    case CompletenessClass::minimal: return "minimal";
    case CompletenessClass::overcomplete: return "overcomplete";
  }
  return "unknown";
}

CompletenessClass classify_completeness(const ProjectorSet& set) {
  const int full = set.dim() * set.dim();
  if (set.coefficient_rank() < full) return CompletenessClass::incomplete;
  return set.size() == full ? CompletenessClass::minimal : CompletenessClass::overcomplete;
}

namespace {

int parse_positive(const std::string& text, const std::string& expression) {
  size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw DomainError("malformed set expression '" + expression + "'");
  }
  if (used != text.size() || value < 1) throw DomainError("malformed set expression '" + expression + "'");
  return value;
}

}  // namespace

ProjectorSet named_set(const std::string& expression) {
  const std::string qudit_prefix = "quditcube:";
  if (expression.rfind(qudit_prefix, 0) == 0) {
    const int d = parse_positive(expression.substr(qudit_prefix.size()), expression);
    if (d > 16) throw DomainError("quditcube dimension above 16 is not supported");
    return qudit_cube_set(d);
  }
  const auto caret = expression.find('^');
  if (caret != std::string::npos) {
    const int power = parse_positive(expression.substr(caret + 1), expression);
    if (power > 4) throw DomainError("tensor powers above 4 are not supported");
    const ProjectorSet base = platonic_set(solid_from_string(expression.substr(0, caret)));
    return tensor_product_set(std::vector<ProjectorSet>(static_cast<size_t>(power), base));
  }
  return platonic_set(solid_from_string(expression));
}

std::vector<std::string> catalogue_names() {
  return {"tetrahedron",   "cube",          "octahedron",     "dodecahedron",   "icosahedron",
          "tetrahedron^2", "cube^2",        "octahedron^2",   "dodecahedron^2", "cube^3",
          "quditcube:2",   "quditcube:3",   "quditcube:4",    "quditcube:5",    "quditcube:7"};
}

}  // namespace qtomo
