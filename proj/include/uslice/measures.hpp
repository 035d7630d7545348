#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "uslice/types.hpp"

namespace uslice {

namespace detail {

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return ((m.derived().array() - m.derived().array()) == 0).all();
}

}  // namespace detail

// Weighted point cloud in R^d. Atom weights are nonnegative; zero-weight
// atoms are kept so potential vectors stay aligned with input indices.
// A zero total mass is representable (it can arise as a reweighting
// output) but is rejected at solver entry. Immutable after construction.
template <class Scalar>
class DiscreteMeasure {
 public:
  DiscreteMeasure(Matrix<Scalar> points, Vector<Scalar> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.rows() == 0 || points_.cols() == 0)
      throw std::invalid_argument("DiscreteMeasure: empty support");
    if (points_.rows() != weights_.size())
      throw std::invalid_argument("DiscreteMeasure: points/weights size mismatch");
    if (!detail::all_finite(points_))
      throw std::invalid_argument("DiscreteMeasure: non-finite coordinate");
    if (!detail::all_finite(weights_) || (weights_.array() < Scalar(0)).any())
      throw std::invalid_argument("DiscreteMeasure: weights must be finite and >= 0");
  }

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const Matrix<Scalar>& points() const { return points_; }
  const Vector<Scalar>& weights() const { return weights_; }

 private:
  Matrix<Scalar> points_;
  Vector<Scalar> weights_;
};

// Measure supported on the real line, e.g. a projection of a point cloud.
// When `sorted` is set the positions are nondecreasing (verified).
template <class Scalar>
class Measure1D {
 public:
  Measure1D(Vector<Scalar> positions, Vector<Scalar> weights, bool sorted)
      : positions_(std::move(positions)), weights_(std::move(weights)), sorted_(sorted) {
    if (positions_.size() == 0)
      throw std::invalid_argument("Measure1D: empty support");
    if (positions_.size() != weights_.size())
      throw std::invalid_argument("Measure1D: positions/weights size mismatch");
    if (!detail::all_finite(positions_))
      throw std::invalid_argument("Measure1D: non-finite position");
    if (!detail::all_finite(weights_) || (weights_.array() < Scalar(0)).any())
      throw std::invalid_argument("Measure1D: weights must be finite and >= 0");
    if (sorted_) {
      for (Index i = 0; i + 1 < positions_.size(); ++i)
        if (positions_(i) > positions_(i + 1))
          throw std::invalid_argument("Measure1D: sorted flag set but positions decrease");
    }
  }

  Index size() const { return positions_.size(); }
  const Vector<Scalar>& positions() const { return positions_; }
  const Vector<Scalar>& weights() const { return weights_; }
  bool sorted() const { return sorted_; }

 private:
  Vector<Scalar> positions_;
  Vector<Scalar> weights_;
  bool sorted_;
};

template <class Scalar>
Scalar mass(const DiscreteMeasure<Scalar>& m) {
  return m.weights().sum();
}

template <class Scalar>
Scalar mass(const Measure1D<Scalar>& m) {
  return m.weights().sum();
}

// Same support, weights multiplied atom-wise by `factors`.
template <class Scalar, class Derived>
DiscreteMeasure<Scalar> reweight(const DiscreteMeasure<Scalar>& m,
                                 const Eigen::MatrixBase<Derived>& factors) {
  if (factors.size() != m.size())
    throw std::invalid_argument("reweight: factor count mismatch");
  if (!detail::all_finite(factors) || (factors.derived().array() < Scalar(0)).any())
    throw std::invalid_argument("reweight: factors must be finite and >= 0");
  return DiscreteMeasure<Scalar>(m.points(),
                                 m.weights().cwiseProduct(factors.derived()));
}

template <class Scalar, class Derived>
Measure1D<Scalar> reweight(const Measure1D<Scalar>& m,
                           const Eigen::MatrixBase<Derived>& factors) {
  if (factors.size() != m.size())
    throw std::invalid_argument("reweight: factor count mismatch");
  if (!detail::all_finite(factors) || (factors.derived().array() < Scalar(0)).any())
    throw std::invalid_argument("reweight: factors must be finite and >= 0");
  return Measure1D<Scalar>(m.positions(), m.weights().cwiseProduct(factors.derived()),
                           m.sorted());
}

template <class Scalar>
DiscreteMeasure<Scalar> normalize_to_probability(const DiscreteMeasure<Scalar>& m) {
  const Scalar total = mass(m);
  if (!(total > Scalar(0)))
    throw std::invalid_argument("normalize_to_probability: zero total mass");
  return DiscreteMeasure<Scalar>(m.points(), m.weights() / total);
}

using DiscreteMeasured = DiscreteMeasure<double>;
using Measure1Dd = Measure1D<double>;

}  // namespace uslice
