#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "uslice/measures.hpp"
#include "uslice/parallel.hpp"
#include "uslice/slicing.hpp"
#include "uslice/types.hpp"

namespace uslice {

// Dual pair for a 1D transport problem: f lives on the first measure's
// sorted support, g on the second's. Anchored by f(0) = 0.
template <class Scalar>
struct DualPotentials {
  Vector<Scalar> f;
  Vector<Scalar> g;
};

namespace detail {

template <class Scalar>
Scalar line_cost(Scalar x, Scalar y, double p) {
  const Scalar d = std::abs(x - y);
  if (p == 2.0) return d * d;
  if (p == 1.0) return d;
  return std::pow(d, static_cast<Scalar>(p));
}

template <class Scalar>
void require_balanced(Scalar ma, Scalar mb, const char* who = "ot1d") {
  const Scalar tol = Scalar(1e-9) * (Scalar(1) + std::max(std::abs(ma), std::abs(mb)));
  if (std::abs(ma - mb) > tol)
    throw std::runtime_error(std::string(who) +
                             ": balanced transport called on unbalanced inputs "
                             "(mass mismatch)");
}

// Exact 1D transport over two sorted supports via the monotone (north-west
// corner) traversal of the coupling. Equivalent to integrating the quantile
// difference |F^{-1} - G^{-1}|^p over the common refinement of the two CDF
// jump sets. When `f`/`g` are non-null, dual potentials are propagated along
// the chain: every matched pair is tight, f(0) = 0, and zero-weight atoms
// receive values from the same recursion. Ties advance the first measure
// first.
template <class Scalar>
Scalar northwest_chain(const Vector<Scalar>& xs, const Vector<Scalar>& wa,
                       const Vector<Scalar>& ys, const Vector<Scalar>& wb, double p,
                       Vector<Scalar>* f, Vector<Scalar>* g) {
  const Index n = xs.size();
  const Index m = ys.size();
  if (f) {
    f->resize(n);
    g->resize(m);
    (*f)(0) = Scalar(0);
    (*g)(0) = line_cost(xs(0), ys(0), p);
  }
  Scalar value = Scalar(0);
  Index i = 0, j = 0;
  Scalar ra = wa(0);
  Scalar rb = wb(0);
  while (i + 1 < n || j + 1 < m) {
    const Scalar step = std::min(ra, rb);
    if (step > Scalar(0)) {
      value += step * line_cost(xs(i), ys(j), p);
      ra -= step;
      rb -= step;
    }
    bool move_first;
    if (ra <= Scalar(0) && i + 1 < n)
      move_first = true;
    else if (rb <= Scalar(0) && j + 1 < m)
      move_first = false;
    else if (i + 1 >= n)
      move_first = false;  // walk out the remaining columns
    else
      move_first = true;  // walk out the remaining rows
    if (move_first) {
      ++i;
      ra = wa(i);
      if (f) (*f)(i) = line_cost(xs(i), ys(j), p) - (*g)(j);
    } else {
      ++j;
      rb = wb(j);
      if (f) (*g)(j) = line_cost(xs(i), ys(j), p) - (*f)(i);
    }
  }
  const Scalar step = std::min(ra, rb);
  if (step > Scalar(0)) value += step * line_cost(xs(n - 1), ys(m - 1), p);
  return value;
}

template <class Scalar>
void check_ot1d_inputs(const Measure1D<Scalar>& mu, const Measure1D<Scalar>& nu, double p) {
  if (!mu.sorted() || !nu.sorted())
    throw std::invalid_argument("ot1d: inputs must be sorted");
  if (!(p >= 1.0))
    throw std::invalid_argument("ot1d: cost exponent p must be >= 1");
  require_balanced(mass(mu), mass(nu));
}

}  // namespace detail

// Exact balanced transport cost between sorted univariate measures with
// line cost |x - y|^p.
template <class Scalar>
Scalar ot1d_loss(const Measure1D<Scalar>& mu, const Measure1D<Scalar>& nu, double p) {
  detail::check_ot1d_inputs(mu, nu, p);
  return detail::northwest_chain(mu.positions(), mu.weights(), nu.positions(),
                                 nu.weights(), p, static_cast<Vector<Scalar>*>(nullptr),
                                 static_cast<Vector<Scalar>*>(nullptr));
}

// Loss plus feasible dual potentials with zero duality gap; f(0) = 0.
template <class Scalar>
std::pair<Scalar, DualPotentials<Scalar>> ot1d_duals(const Measure1D<Scalar>& mu,
                                                     const Measure1D<Scalar>& nu,
                                                     double p) {
  detail::check_ot1d_inputs(mu, nu, p);
  DualPotentials<Scalar> duals;
  const Scalar value = detail::northwest_chain(mu.positions(), mu.weights(),
                                               nu.positions(), nu.weights(), p,
                                               &duals.f, &duals.g);
  return {value, std::move(duals)};
}

// Mean of the 1D transport cost over the projection directions.
template <class Scalar>
Scalar sliced_ot_loss(const DiscreteMeasure<Scalar>& alpha,
                      const DiscreteMeasure<Scalar>& beta,
                      const ProjectionSet<Scalar>& dirs, double p) {
  if (alpha.dim() != beta.dim() || alpha.dim() != dirs.dim())
    throw std::invalid_argument("sliced_ot_loss: dimension mismatch");
  if (!(p >= 1.0))
    throw std::invalid_argument("sliced_ot_loss: cost exponent p must be >= 1");
  detail::require_balanced(mass(alpha), mass(beta));
  const Index k = dirs.count();
  Vector<Scalar> per_slice(k);
  parallel_for(k, [&](Index slice) {
    const auto pa = project(alpha, dirs.directions().row(slice).transpose());
    const auto pb = project(beta, dirs.directions().row(slice).transpose());
    per_slice(slice) = detail::northwest_chain(
        pa.line.positions(), pa.line.weights(), pb.line.positions(), pb.line.weights(),
        p, static_cast<Vector<Scalar>*>(nullptr), static_cast<Vector<Scalar>*>(nullptr));
  });
  return per_slice.sum() / static_cast<Scalar>(k);
}

}  // namespace uslice
