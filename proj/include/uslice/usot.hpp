#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uslice/fw_core.hpp"
#include "uslice/parallel.hpp"
#include "uslice/slicing.hpp"
#include "uslice/suot.hpp"
#include "uslice/types.hpp"

namespace uslice {

// Average of per-slice potentials scattered back to original atom order:
// out[orders[k][rank]] accumulates per_slice[k](rank) / K.
template <class Scalar>
Vector<Scalar> avg_pot(const std::vector<Vector<Scalar>>& per_slice,
                       const std::vector<std::vector<Index>>& orders, Index n_atoms) {
  if (per_slice.empty() || per_slice.size() != orders.size())
    throw std::invalid_argument("avg_pot: slice count mismatch");
  Vector<Scalar> out = Vector<Scalar>::Zero(n_atoms);
  for (std::size_t k = 0; k < per_slice.size(); ++k) {
    if (per_slice[k].size() != n_atoms ||
        orders[k].size() != static_cast<std::size_t>(n_atoms))
      throw std::invalid_argument("avg_pot: potential length mismatch");
    for (Index r = 0; r < n_atoms; ++r)
      out(orders[k][static_cast<std::size_t>(r)]) += per_slice[k](r);
  }
  return out / static_cast<Scalar>(per_slice.size());
}

namespace detail {

// Shared loop for the globally-reweighted sliced solver. `refresh(t)` must
// fill `support` for iteration t and say whether it changed.
template <class Scalar, class Refresh>
std::pair<Scalar, FWState<Scalar>> usot_loop(const DiscreteMeasure<Scalar>& alpha,
                                             const DiscreteMeasure<Scalar>& beta,
                                             const UnbalancedParams& params, Index k,
                                             SlicedSupport<Scalar>& support,
                                             Refresh refresh) {
  const double rho1 = params.div1.rho;
  const double rho2 = params.div2.rho;
  const Index n = alpha.size();
  const Index m = beta.size();
  const Vector<Scalar>& wa = alpha.weights();
  const Vector<Scalar>& wb = beta.weights();

  Vector<Scalar> f_avg = Vector<Scalar>::Zero(n);
  Vector<Scalar> g_avg = Vector<Scalar>::Zero(m);
  std::vector<Vector<Scalar>> r(static_cast<std::size_t>(k));
  std::vector<Vector<Scalar>> s(static_cast<std::size_t>(k));

  FWState<Scalar> state;
  state.layout = PotentialLayout::Averaged;

  for (int t = 0; t < params.fw_iters; ++t) {
    if (params.fw_tol > 0.0 && state.trace.size() >= 2) {
      const Scalar gain = state.trace[state.trace.size() - 1] -
                          state.trace[state.trace.size() - 2];
      if (std::abs(static_cast<double>(gain)) < params.fw_tol) break;
    }
    refresh(t);
    const Scalar lambda = lambda_star(f_avg, g_avg, wa, wb, rho1, rho2);
    if (t > 0)
      state.trace.push_back(detail::dual_objective(f_avg, g_avg, lambda, wa, wb,
                                                   params.div1, params.div2));
    auto factors = detail::norm_factors(f_avg, g_avg, lambda, rho1, rho2);
    const Vector<Scalar> wa_bar = wa.cwiseProduct(factors.first);
    const Vector<Scalar> wb_bar = wb.cwiseProduct(factors.second);
    parallel_for(k, [&](Index slice) {
      const auto idx = static_cast<std::size_t>(slice);
      Vector<Scalar> wa_sorted(n), wb_sorted(m);
      for (Index rank = 0; rank < n; ++rank)
        wa_sorted(rank) = wa_bar(support.ord_a[slice][static_cast<std::size_t>(rank)]);
      for (Index rank = 0; rank < m; ++rank)
        wb_sorted(rank) = wb_bar(support.ord_b[slice][static_cast<std::size_t>(rank)]);
      detail::northwest_chain(support.pos_a[slice], wa_sorted, support.pos_b[slice],
                              wb_sorted, params.p, &r[idx], &s[idx]);
    });
    const Vector<Scalar> r_avg = avg_pot(r, support.ord_a, n);
    const Vector<Scalar> s_avg = avg_pot(s, support.ord_b, m);
    auto stepped = fw_step(f_avg, g_avg, r_avg, s_avg, t);
    f_avg = std::move(stepped.first);
    g_avg = std::move(stepped.second);
    ++state.iteration;
  }

  const Scalar lambda = lambda_star(f_avg, g_avg, wa, wb, rho1, rho2);
  state.trace.push_back(
      detail::dual_objective(f_avg, g_avg, lambda, wa, wb, params.div1, params.div2));
  state.potentials.resize(1);
  state.potentials[0].f = f_avg.array() + lambda;
  state.potentials[0].g = g_avg.array() - lambda;
  return {state.trace.back(), std::move(state)};
}

}  // namespace detail

// Globally-reweighted sliced unbalanced transport: a single averaged dual
// pair over original atoms; each iteration reweights the inputs, solves one
// balanced 1D problem per direction, averages the slice duals and steps.
template <class Scalar>
std::pair<Scalar, FWState<Scalar>> usot(const DiscreteMeasure<Scalar>& alpha,
                                        const DiscreteMeasure<Scalar>& beta,
                                        const ProjectionSet<Scalar>& dirs,
                                        const UnbalancedParams& params) {
  require_kl_setting(params);
  detail::check_pair(alpha, beta, dirs.dim(), "usot");
  detail::SlicedSupport<Scalar> support;
  detail::slice_supports(alpha, beta, dirs, support);
  return detail::usot_loop(alpha, beta, params, dirs.count(), support,
                           [](int) { /* fixed directions */ });
}

// Same loop with a fresh direction set drawn at every outer iteration; the
// sampler seed for iteration t is params.seed XOR t, so replays are exact.
template <class Scalar>
std::pair<Scalar, FWState<Scalar>> usot_stochastic(const DiscreteMeasure<Scalar>& alpha,
                                                   const DiscreteMeasure<Scalar>& beta,
                                                   const UnbalancedParams& params) {
  require_kl_setting(params);
  detail::check_pair(alpha, beta, Index(-1), "usot_stochastic");
  const Index k = params.n_projections;
  detail::SlicedSupport<Scalar> support;
  auto refresh = [&](int t) {
    const auto dirs = sample_directions<Scalar>(
        alpha.dim(), k, params.seed ^ static_cast<std::uint64_t>(t));
    detail::slice_supports(alpha, beta, dirs, support);
  };
  return detail::usot_loop(alpha, beta, params, k, support, refresh);
}

// The optimal marginal pair: one global reweighting of the inputs by the
// averaged, translated potentials. It does not depend on the direction.
template <class Scalar>
std::pair<DiscreteMeasure<Scalar>, DiscreteMeasure<Scalar>> usot_marginals(
    const FWState<Scalar>& state, const DiscreteMeasure<Scalar>& alpha,
    const DiscreteMeasure<Scalar>& beta, const UnbalancedParams& params) {
  require_kl_setting(params);
  detail::check_pair(alpha, beta, Index(-1), "usot_marginals");
  if (state.layout != PotentialLayout::Averaged || state.potentials.size() != 1 ||
      state.potentials[0].f.size() != alpha.size() ||
      state.potentials[0].g.size() != beta.size())
    throw std::invalid_argument("usot_marginals: state does not match the inputs");
  return norm(alpha, beta, state.potentials[0].f, state.potentials[0].g,
              params.div1.rho, params.div2.rho);
}

}  // namespace uslice
