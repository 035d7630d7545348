#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uslice/fw_core.hpp"
#include "uslice/parallel.hpp"
#include "uslice/slicing.hpp"
#include "uslice/types.hpp"

namespace uslice {

namespace detail {

template <class Scalar>
Vector<Scalar> scatter_to_original(const Vector<Scalar>& sorted_values,
                                   const std::vector<Index>& order) {
  Vector<Scalar> out(sorted_values.size());
  for (Index r = 0; r < sorted_values.size(); ++r)
    out(order[static_cast<std::size_t>(r)]) = sorted_values(r);
  return out;
}

// Per-slice sorted projections of an input pair. Positions and sort orders
// are fixed across FW iterations; weights are stored in sorted order.
template <class Scalar>
struct SlicedSupport {
  std::vector<Vector<Scalar>> pos_a, pos_b;
  std::vector<Vector<Scalar>> w_a, w_b;
  std::vector<std::vector<Index>> ord_a, ord_b;

  void resize(Index k) {
    pos_a.resize(k);
    pos_b.resize(k);
    w_a.resize(k);
    w_b.resize(k);
    ord_a.resize(k);
    ord_b.resize(k);
  }
};

template <class Scalar>
void slice_supports(const DiscreteMeasure<Scalar>& alpha,
                    const DiscreteMeasure<Scalar>& beta,
                    const ProjectionSet<Scalar>& dirs, SlicedSupport<Scalar>& out) {
  const Index k = dirs.count();
  out.resize(k);
  parallel_for(k, [&](Index slice) {
    auto pa = project(alpha, dirs.directions().row(slice).transpose());
    auto pb = project(beta, dirs.directions().row(slice).transpose());
    out.pos_a[slice] = pa.line.positions();
    out.w_a[slice] = pa.line.weights();
    out.ord_a[slice] = std::move(pa.order);
    out.pos_b[slice] = pb.line.positions();
    out.w_b[slice] = pb.line.weights();
    out.ord_b[slice] = std::move(pb.order);
  });
}

template <class Scalar>
void check_pair(const DiscreteMeasure<Scalar>& alpha, const DiscreteMeasure<Scalar>& beta,
                Index dirs_dim, const char* who) {
  if (alpha.dim() != beta.dim() || (dirs_dim >= 0 && alpha.dim() != dirs_dim))
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (!(mass(alpha) > Scalar(0)) || !(mass(beta) > Scalar(0)))
    throw std::invalid_argument(std::string(who) + ": zero-mass input");
}

}  // namespace detail

// Sliced unbalanced transport: one unbalanced 1D problem per direction,
// all slices sharing the step counter; the value is the uniform average of
// the per-slice dual objectives. Per-slice potentials are returned over the
// original atom indices.
template <class Scalar>
std::pair<Scalar, FWState<Scalar>> suot(const DiscreteMeasure<Scalar>& alpha,
                                        const DiscreteMeasure<Scalar>& beta,
                                        const ProjectionSet<Scalar>& dirs,
                                        const UnbalancedParams& params) {
  require_kl_setting(params);
  detail::check_pair(alpha, beta, dirs.dim(), "suot");
  const Index k = dirs.count();
  const double rho1 = params.div1.rho;
  const double rho2 = params.div2.rho;

  detail::SlicedSupport<Scalar> support;
  detail::slice_supports(alpha, beta, dirs, support);

  std::vector<Vector<Scalar>> f(static_cast<std::size_t>(k));
  std::vector<Vector<Scalar>> g(static_cast<std::size_t>(k));
  for (Index s = 0; s < k; ++s) {
    f[static_cast<std::size_t>(s)] = Vector<Scalar>::Zero(alpha.size());
    g[static_cast<std::size_t>(s)] = Vector<Scalar>::Zero(beta.size());
  }

  FWState<Scalar> state;
  state.layout = PotentialLayout::PerSlice;
  Vector<Scalar> slice_obj(k);
  Vector<Scalar> slice_lambda(k);

  for (int t = 0; t < params.fw_iters; ++t) {
    if (params.fw_tol > 0.0 && state.trace.size() >= 2) {
      const Scalar gain = state.trace[state.trace.size() - 1] -
                          state.trace[state.trace.size() - 2];
      if (std::abs(static_cast<double>(gain)) < params.fw_tol) break;
    }
    parallel_for(k, [&](Index s) {
      const auto idx = static_cast<std::size_t>(s);
      const Scalar lambda =
          lambda_star(f[idx], g[idx], support.w_a[s], support.w_b[s], rho1, rho2);
      slice_obj(s) = detail::dual_objective(f[idx], g[idx], lambda, support.w_a[s],
                                            support.w_b[s], params.div1, params.div2);
      auto factors = detail::norm_factors(f[idx], g[idx], lambda, rho1, rho2);
      Vector<Scalar> r, si;
      detail::northwest_chain(support.pos_a[s],
                              support.w_a[s].cwiseProduct(factors.first).eval(),
                              support.pos_b[s],
                              support.w_b[s].cwiseProduct(factors.second).eval(),
                              params.p, &r, &si);
      auto stepped = fw_step(f[idx], g[idx], r, si, t);
      f[idx] = std::move(stepped.first);
      g[idx] = std::move(stepped.second);
    });
    if (t > 0) state.trace.push_back(slice_obj.mean());
    ++state.iteration;
  }

  parallel_for(k, [&](Index s) {
    const auto idx = static_cast<std::size_t>(s);
    slice_lambda(s) =
        lambda_star(f[idx], g[idx], support.w_a[s], support.w_b[s], rho1, rho2);
    slice_obj(s) =
        detail::dual_objective(f[idx], g[idx], slice_lambda(s), support.w_a[s],
                               support.w_b[s], params.div1, params.div2);
  });
  state.trace.push_back(slice_obj.mean());

  state.potentials.resize(static_cast<std::size_t>(k));
  for (Index s = 0; s < k; ++s) {
    const auto idx = static_cast<std::size_t>(s);
    state.potentials[idx].f = detail::scatter_to_original(
        (f[idx].array() + slice_lambda(s)).matrix().eval(), support.ord_a[s]);
    state.potentials[idx].g = detail::scatter_to_original(
        (g[idx].array() - slice_lambda(s)).matrix().eval(), support.ord_b[s]);
  }
  return {state.trace.back(), std::move(state)};
}

// Per-slice optimal marginal pairs: the translated exponential reweighting
// applied to the original inputs, one pair per direction.
template <class Scalar>
std::vector<std::pair<DiscreteMeasure<Scalar>, DiscreteMeasure<Scalar>>> suot_marginals(
    const FWState<Scalar>& state, const DiscreteMeasure<Scalar>& alpha,
    const DiscreteMeasure<Scalar>& beta, const ProjectionSet<Scalar>& dirs,
    const UnbalancedParams& params) {
  require_kl_setting(params);
  detail::check_pair(alpha, beta, dirs.dim(), "suot_marginals");
  if (state.layout != PotentialLayout::PerSlice ||
      state.potentials.size() != static_cast<std::size_t>(dirs.count()))
    throw std::invalid_argument("suot_marginals: state does not match the inputs");
  std::vector<std::pair<DiscreteMeasure<Scalar>, DiscreteMeasure<Scalar>>> out;
  out.reserve(state.potentials.size());
  for (const auto& duals : state.potentials) {
    if (duals.f.size() != alpha.size() || duals.g.size() != beta.size())
      throw std::invalid_argument("suot_marginals: state does not match the inputs");
    out.push_back(norm(alpha, beta, duals.f, duals.g, params.div1.rho, params.div2.rho));
  }
  return out;
}

}  // namespace uslice
