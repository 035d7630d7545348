#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uslice/measures.hpp"
#include "uslice/numerics.hpp"
#include "uslice/types.hpp"

namespace uslice {

// K unit directions on S^{d-1}, kept with the seed that generated them.
template <class Scalar>
class ProjectionSet {
 public:
  ProjectionSet(Matrix<Scalar> directions, std::uint64_t seed)
      : directions_(std::move(directions)), seed_(seed) {
    if (directions_.rows() == 0 || directions_.cols() == 0)
      throw std::invalid_argument("ProjectionSet: empty direction set");
    for (Index k = 0; k < directions_.rows(); ++k) {
      const Scalar norm = directions_.row(k).norm();
      if (std::abs(static_cast<double>(norm) - 1.0) > 1e-12)
        throw std::invalid_argument("ProjectionSet: row is not unit length");
    }
  }

  Index count() const { return directions_.rows(); }
  Index dim() const { return directions_.cols(); }
  const Matrix<Scalar>& directions() const { return directions_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Matrix<Scalar> directions_;
  std::uint64_t seed_;
};

// Uniform directions via normalized i.i.d. Gaussian draws. The stream is
// mt19937_64 + Box-Muller (see NormalSampler), so a (d, K, seed) triple
// reproduces the exact same matrix.
template <class Scalar = double>
ProjectionSet<Scalar> sample_directions(Index d, Index k, std::uint64_t seed) {
  if (d < 1 || k < 1)
    throw std::invalid_argument("sample_directions: d and K must be >= 1");
  NormalSampler gen(seed);
  Matrix<Scalar> dirs(k, d);
  for (Index row = 0; row < k; ++row) {
    Scalar norm = Scalar(0);
    do {
      for (Index col = 0; col < d; ++col)
        dirs(row, col) = static_cast<Scalar>(gen.next());
      norm = dirs.row(row).norm();
    } while (!(norm > Scalar(1e-12)));
    dirs.row(row) /= norm;
  }
  return ProjectionSet<Scalar>(std::move(dirs), seed);
}

// A projected measure: sorted line support plus the permutation mapping
// rank -> original atom index, so per-slice potentials can be scattered
// back to input order.
template <class Scalar>
struct ProjectedMeasure {
  Measure1D<Scalar> line;
  std::vector<Index> order;
};

// Push-forward of m under x -> <theta, x>, sorted ascending with a stable
// sort (equal positions keep input order).
template <class Scalar, class Derived>
ProjectedMeasure<Scalar> project(const DiscreteMeasure<Scalar>& m,
                                 const Eigen::MatrixBase<Derived>& theta) {
  if (theta.size() != m.dim())
    throw std::invalid_argument("project: direction dimension mismatch");
  if (std::abs(static_cast<double>(theta.derived().norm()) - 1.0) > 1e-9)
    throw std::invalid_argument("project: direction is not unit length");
  Vector<Scalar> raw = m.points() * theta.derived();
  std::vector<Index> order(static_cast<std::size_t>(m.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&raw](Index a, Index b) { return raw(a) < raw(b); });
  Vector<Scalar> positions(m.size());
  Vector<Scalar> weights(m.size());
  for (Index r = 0; r < m.size(); ++r) {
    positions(r) = raw(order[static_cast<std::size_t>(r)]);
    weights(r) = m.weights()(order[static_cast<std::size_t>(r)]);
  }
  return ProjectedMeasure<Scalar>{
      Measure1D<Scalar>(std::move(positions), std::move(weights), true),
      std::move(order)};
}

}  // namespace uslice
