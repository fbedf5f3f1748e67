#include "qtomo/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qtomo/error.hpp"

namespace qtomo {

std::string to_string(OptimizerStrategy strategy) {
  switch (strategy) {
    case OptimizerStrategy::accelerated_projected_gradient: return "accelerated_projected_gradient";
    case OptimizerStrategy::projected_gradient: return "projected_gradient";
  }
  return "unknown";
}

OptimizerStrategy optimizer_strategy_from_string(const std::string& name) {
  if (name == "accelerated_projected_gradient") return OptimizerStrategy::accelerated_projected_gradient;
  if (name == "projected_gradient") return OptimizerStrategy::projected_gradient;
  throw DomainError("unknown optimizer strategy '" + name + "'");
}

void OptimizerOptions::validate() const {
  if (max_iterations < 1) throw DomainError("max_iterations must be positive");
  if (!(relative_tolerance > 0.0) || !(gradient_tolerance > 0.0) || !(denominator_floor > 0.0))
    throw DomainError("optimizer tolerances must be positive");
}

namespace {

void check_complete(const ProjectorSet& set) {
  if (set.coefficient_rank() < set.dim() * set.dim())
    throw DomainError("reconstruction requires an informationally complete projector set");
}

void check_dataset(const CountDataset& dataset, const ProjectorSet& set) {
  if (static_cast<int>(dataset.counts.size()) != set.size())
    throw DomainError("dataset count length does not match the projector set");
  for (auto n : dataset.counts)
    if (n < 0) throw DomainError("counts must be non-negative");
}

// Weighted least-squares objective in matrix space. The projector vectors are
// stored as the columns of `vectors_` so that all M expectations come from one
// product.
class Objective {
 public:
  Objective(const ProjectorSet& set, const std::vector<std::int64_t>& counts, double floor)
      : vectors_(set.dim(), set.size()), counts_(set.size()), floor_(floor) {
    for (int j = 0; j < set.size(); ++j) {
      vectors_.col(j) = set.states()[static_cast<size_t>(j)];
      counts_[j] = static_cast<double>(counts[static_cast<size_t>(j)]);
    }
  }

  // Fills `expected` with n_j(x) and returns the objective.
  double value(const ComplexMatrix& x, RealVector& expected) const {
    expected = (vectors_.conjugate().cwiseProduct(x * vectors_)).colwise().sum().real().transpose();
    double total = 0.0;
    for (Eigen::Index j = 0; j < expected.size(); ++j) {
      const double r = counts_[j] - expected[j];
      total += r * r / std::max(expected[j], floor_);
    }
    return total;
  }

  ComplexMatrix gradient(const RealVector& expected) const {
    RealVector g(expected.size());
    for (Eigen::Index j = 0; j < expected.size(); ++j) {
      const double n = expected[j];
      const double big_n = counts_[j];
      g[j] = n > floor_ ? 1.0 - (big_n * big_n) / (n * n) : -2.0 * (big_n - n) / floor_;
    }
    return vectors_ * g.cast<Complex>().asDiagonal() * vectors_.adjoint();
  }

  // Upper estimate of the gradient's Lipschitz constant at a point.
  double curvature(const RealVector& expected) const {
    double total = 0.0;
    for (Eigen::Index j = 0; j < expected.size(); ++j) {
      const double n = std::max(expected[j], floor_);
      total += 2.0 * counts_[j] * counts_[j] / (n * n * n) + 2.0 / n;
    }
    return total;
  }

 private:
  ComplexMatrix vectors_;
  RealVector counts_;
  double floor_;
};

double inner(const ComplexMatrix& a, const ComplexMatrix& b) { return a.cwiseProduct(b.conjugate()).sum().real(); }

}  // namespace

ComplexMatrix linear_inversion(const CountDataset& dataset, const ProjectorSet& set) {
  check_dataset(dataset, set);
  check_complete(set);
  RealVector counts(set.size());
  for (int j = 0; j < set.size(); ++j) counts[j] = static_cast<double>(dataset.counts[static_cast<size_t>(j)]);
  // q is real because both the basis and the projectors are Hermitian, so q* = q.
  return hermitian_part(set.basis().compose(set.inversion_matrix() * counts));
}

double objective(const CountDataset& dataset, const ComplexMatrix& candidate, double floor) {
  if (candidate.rows() != dataset.dim() || candidate.cols() != dataset.dim())
    throw DomainError("objective: candidate dimension does not match the dataset");
  check_dataset(dataset, dataset.set);
  RealVector expected;
  return Objective(dataset.set, dataset.counts, floor).value(candidate, expected);
}

double denominator_floor(const CountDataset& dataset, const OptimizerOptions& options) {
  return options.denominator_floor * std::max(dataset.total_counts(), 1.0);
}

double objective(const CountDataset& dataset, const DensityMatrix& candidate) {
  return objective(dataset, candidate.matrix(), denominator_floor(dataset));
}

ReconstructionResult mle_reconstruct(const CountDataset& dataset, const ProjectorSet& set,
                                     const OptimizerOptions& options) {
  options.validate();
  check_dataset(dataset, set);
  check_complete(set);
  const double total = dataset.total_counts();
  if (!(total > 0.0)) throw DomainError("mle_reconstruct: all counts are zero");

  const Objective f(set, dataset.counts, options.denominator_floor * total);
  const int d = set.dim();

  ComplexMatrix x = project_psd(linear_inversion(dataset, set));
  if (!(x.trace().real() > 0.0))
    x = ComplexMatrix::Identity(d, d) * (total / static_cast<double>(set.size()));

  RealVector n_x;
  double fx = f.value(x, n_x);
  double lipschitz = std::max(f.curvature(n_x) / static_cast<double>(set.size()), 1e-12);
  const bool accelerate = options.strategy == OptimizerStrategy::accelerated_projected_gradient;
  const double gradient_limit = options.gradient_tolerance * total;

  ReconstructionResult result{DensityMatrix(x.trace().real() > 0.0 ? x : ComplexMatrix::Identity(d, d)), {}, fx, 0,
                              false, std::numeric_limits<double>::infinity(), {}};
  if (options.record_history) result.objective_history.push_back(fx);

  ComplexMatrix y = x;
  ComplexMatrix z;
  RealVector n_y = n_x, n_z;
  double fy = fx;
  double momentum = 1.0;
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    const ComplexMatrix grad = f.gradient(n_y);

    // Backtracking on the quadratic upper model around y.
    double fz = 0.0;
    for (int attempt = 0; attempt < 200; ++attempt) {
      z = project_psd(y - grad / lipschitz);
      fz = f.value(z, n_z);
      const ComplexMatrix step = z - y;
      if (fz <= fy + inner(grad, step) + 0.5 * lipschitz * step.squaredNorm() + 1e-12 * std::abs(fy)) break;
      lipschitz *= 2.0;
    }
    const double mapping_norm = lipschitz * (z - y).norm();

    const double previous = fx;
    ComplexMatrix x_next = x;
    RealVector n_next = n_x;
    double f_next = fx;
    // Rises at round-off scale still count, otherwise an exact fit never settles.
    const bool accepted = fz <= fx + 1e-14 * total;
    if (accepted) {
      x_next = z;
      n_next = n_z;
      f_next = fz;
    }

    if (accelerate) {
      // Restart when the step opposes the last move or the prox point failed to improve.
      const bool restart = !accepted || inner(y - z, z - x) > 0.0;
      if (restart) {
        momentum = 1.0;
        y = x_next;
        n_y = n_next;
        fy = f_next;
      } else {
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = x_next + (momentum / next_momentum) * (z - x_next) + ((momentum - 1.0) / next_momentum) * (x_next - x);
        momentum = next_momentum;
        fy = f.value(y, n_y);
      }
    } else {
      y = x_next;
      n_y = n_next;
      fy = f_next;
    }

    x = std::move(x_next);
    n_x = std::move(n_next);
    fx = f_next;
    if (options.record_history) result.objective_history.push_back(fx);
    result.gradient_mapping_norm = mapping_norm;

    // The mapping norm certifies the prox point z, so only stop when x is z.
    const double decrease = previous - fx;
    if (accepted && decrease <= options.relative_tolerance * std::max(fx, 1.0) && mapping_norm <= gradient_limit) {
      result.converged = true;
      ++iteration;
      break;
    }
    lipschitz *= 0.8;
  }

  result.estimate = DensityMatrix(x);
  result.objective = fx;
  result.iterations = iteration;
  result.residuals.resize(static_cast<size_t>(set.size()));
  for (int j = 0; j < set.size(); ++j)
    result.residuals[static_cast<size_t>(j)] = static_cast<double>(dataset.counts[static_cast<size_t>(j)]) - n_x[j];
  return result;
}

}  // namespace qtomo
