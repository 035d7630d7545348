#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uslice/divergences.hpp"
#include "uslice/measures.hpp"
#include "uslice/numerics.hpp"
#include "uslice/parallel.hpp"
#include "uslice/slicing.hpp"
#include "uslice/types.hpp"
#include "uslice/usot.hpp"

namespace uslice {

// Probability measure on a fixed support (e.g. an image raster): weights
// live on the simplex.
template <class Scalar>
class GridMeasure {
 public:
  GridMeasure(Matrix<Scalar> grid_points, Vector<Scalar> weights)
      : points_(std::move(grid_points)), weights_(std::move(weights)) {
    if (points_.rows() == 0 || points_.cols() == 0)
      throw std::invalid_argument("GridMeasure: empty grid");
    if (points_.rows() != weights_.size())
      throw std::invalid_argument("GridMeasure: grid/weights size mismatch");
    if (!detail::all_finite(points_) || !detail::all_finite(weights_))
      throw std::invalid_argument("GridMeasure: non-finite entry");
    if ((weights_.array() < Scalar(0)).any())
      throw std::invalid_argument("GridMeasure: negative weight");
    if (std::abs(static_cast<double>(weights_.sum()) - 1.0) > 1e-9)
      throw std::invalid_argument("GridMeasure: weights must sum to 1");
  }

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const Matrix<Scalar>& grid_points() const { return points_; }
  const Vector<Scalar>& weights() const { return weights_; }

  DiscreteMeasure<Scalar> as_measure() const {
    return DiscreteMeasure<Scalar>(points_, weights_);
  }

 private:
  Matrix<Scalar> points_;
  Vector<Scalar> weights_;
};

template <class Scalar>
struct BarycenterProblem {
  std::vector<DiscreteMeasure<Scalar>> inputs;
  Vector<Scalar> omegas;       // nonnegative, sums to 1
  Matrix<Scalar> grid_points;  // fixed support of the barycenter
  UnbalancedParams params;
  double lr = 1.0;
  int iters = 500;
};

template <class Scalar>
struct BarycenterDiagnostics {
  std::vector<Scalar> objective;    // weighted sum of the per-input values
  std::vector<Scalar> simplex_gap;  // max |sum(w) - 1| over the three iterates
};

namespace detail {

// Value and gradient of the sliced unbalanced loss w.r.t. the weights of
// the second input, at fixed directions. By first-order stationarity of
// the inner solve the gradient is the second dual transform applied to the
// translated averaged potential on each grid cell.
template <class Scalar>
std::pair<Scalar, Vector<Scalar>> usot_value_and_gradient(
    const DiscreteMeasure<Scalar>& alpha, const DiscreteMeasure<Scalar>& beta,
    const ProjectionSet<Scalar>& dirs, const UnbalancedParams& params) {
  auto solved = usot(alpha, beta, dirs, params);
  const Vector<Scalar>& g_rec = solved.second.potentials[0].g;
  Vector<Scalar> grad(g_rec.size());
  for (Index j = 0; j < g_rec.size(); ++j) grad(j) = phi_circ(params.div2, g_rec(j));
  return {solved.first, std::move(grad)};
}

}  // namespace detail

template <class Scalar>
Vector<Scalar> usot_gradient_wrt_beta(const DiscreteMeasure<Scalar>& alpha,
                                      const GridMeasure<Scalar>& beta,
                                      const ProjectionSet<Scalar>& dirs,
                                      const UnbalancedParams& params) {
  return detail::usot_value_and_gradient(alpha, beta.as_measure(), dirs, params).second;
}

// Barycenter of the inputs under the sliced unbalanced loss, on the fixed
// grid: Nesterov-accelerated mirror descent with multiplicative updates
// and exact renormalization, drawing fresh directions at every outer
// iteration (seed mixed with the iteration index). Cells that reach weight
// zero stay at zero under the multiplicative update.
template <class Scalar>
GridMeasure<Scalar> barycenter(const BarycenterProblem<Scalar>& problem,
                               BarycenterDiagnostics<Scalar>* diag = nullptr) {
  require_kl_setting(problem.params);
  const std::size_t b_count = problem.inputs.size();
  if (b_count == 0) throw std::invalid_argument("barycenter: no input measures");
  if (problem.omegas.size() != static_cast<Index>(b_count))
    throw std::invalid_argument("barycenter: omega count mismatch");
  if ((problem.omegas.array() < Scalar(0)).any() ||
      std::abs(static_cast<double>(problem.omegas.sum()) - 1.0) > 1e-9)
    throw std::invalid_argument("barycenter: omegas must be nonnegative and sum to 1");
  if (problem.iters < 1) throw std::invalid_argument("barycenter: iters must be >= 1");
  if (!(problem.lr > 0.0) || !std::isfinite(problem.lr))
    throw std::invalid_argument("barycenter: lr must be finite and > 0");
  const Index grid_size = problem.grid_points.rows();
  const Index dim = problem.grid_points.cols();
  if (grid_size == 0 || dim == 0)
    throw std::invalid_argument("barycenter: empty grid");
  for (const auto& input : problem.inputs) {
    if (input.dim() != dim)
      throw std::invalid_argument("barycenter: input dimension mismatch");
    if (!(mass(input) > Scalar(0)))
      throw std::invalid_argument("barycenter: zero-mass input");
  }

  const Scalar uniform = Scalar(1) / static_cast<Scalar>(grid_size);
  Vector<Scalar> current = Vector<Scalar>::Constant(grid_size, uniform);
  Vector<Scalar> proposal = current;  // mirror-step point
  Vector<Scalar> anchor = current;    // aggregated point

  std::vector<Vector<Scalar>> grads(b_count);
  Vector<Scalar> values(static_cast<Index>(b_count));
  Scalar gamma = Scalar(1);

  for (int t = 1; t <= problem.iters; ++t) {
    gamma = Scalar(2) / Scalar(t + 1);
    current = (Scalar(1) - gamma) * anchor + gamma * proposal;
    const auto dirs = sample_directions<Scalar>(
        dim, problem.params.n_projections,
        mix_seed(problem.params.seed, static_cast<std::uint64_t>(t)));
    const DiscreteMeasure<Scalar> beta(problem.grid_points, current);
    parallel_for(static_cast<Index>(b_count), [&](Index b) {
      const auto idx = static_cast<std::size_t>(b);
      if (problem.omegas(b) > Scalar(0)) {
        auto vg = detail::usot_value_and_gradient(problem.inputs[idx], beta, dirs,
                                                  problem.params);
        values(b) = vg.first;
        grads[idx] = std::move(vg.second);
      } else {
        values(b) = Scalar(0);
        grads[idx] = Vector<Scalar>::Zero(grid_size);
      }
    });
    Vector<Scalar> grad = Vector<Scalar>::Zero(grid_size);
    for (std::size_t idx = 0; idx < b_count; ++idx)
      grad += problem.omegas(static_cast<Index>(idx)) * grads[idx];

    for (Index j = 0; j < grid_size; ++j)
      proposal(j) = current(j) *
                    clamped_exp(-Scalar(problem.lr) / gamma * grad(j));
    const Scalar proposal_mass = proposal.sum();
    if (!(proposal_mass > Scalar(0)))
      throw std::runtime_error("barycenter: grid mass vanished in the mirror step");
    proposal /= proposal_mass;
    anchor = (Scalar(1) - gamma) * anchor + gamma * proposal;

    if (diag) {
      diag->objective.push_back(problem.omegas.dot(values));
      const Scalar gap = std::max(
          {std::abs(current.sum() - Scalar(1)), std::abs(proposal.sum() - Scalar(1)),
           std::abs(anchor.sum() - Scalar(1))});
      diag->simplex_gap.push_back(gap);
    }
  }
  // the evaluation point the next iteration would form
  gamma = Scalar(2) / Scalar(problem.iters + 2);
  current = (Scalar(1) - gamma) * anchor + gamma * proposal;
  return GridMeasure<Scalar>(problem.grid_points, std::move(current));
}

}  // namespace uslice
