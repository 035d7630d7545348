#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "uslice/divergences.hpp"
#include "uslice/measures.hpp"
#include "uslice/numerics.hpp"
#include "uslice/ot1d.hpp"
#include "uslice/types.hpp"

namespace uslice {

enum class PotentialLayout { PerSlice, Averaged };

// Solver state: dual potentials over original atom indices (one pair per
// slice, or a single averaged pair), the step counter, and the dual
// objective recorded after every step.
template <class Scalar>
struct FWState {
  PotentialLayout layout = PotentialLayout::PerSlice;
  std::vector<DualPotentials<Scalar>> potentials;
  int iteration = 0;
  std::vector<Scalar> trace;
};

// Optimal translation of a dual pair (f + lambda, g - lambda) in the KL
// setting; computed in the log domain. At this lambda the two reweighted
// masses coincide, which is the first-order condition.
template <class Scalar>
Scalar lambda_star(const Vector<Scalar>& f, const Vector<Scalar>& g,
                   const Vector<Scalar>& wa, const Vector<Scalar>& wb, double rho1,
                   double rho2) {
  if (f.size() != wa.size() || g.size() != wb.size())
    throw std::invalid_argument("lambda_star: potential/weight size mismatch");
  const Scalar log_int_a = log_integral_exp((-f / Scalar(rho1)).eval(), wa);
  const Scalar log_int_b = log_integral_exp((-g / Scalar(rho2)).eval(), wb);
  if (!std::isfinite(static_cast<double>(log_int_a)) ||
      !std::isfinite(static_cast<double>(log_int_b)))
    throw std::runtime_error("lambda_star: zero-mass measure");
  const Scalar scale = Scalar(rho1) * Scalar(rho2) / Scalar(rho1 + rho2);
  return scale * (log_int_a - log_int_b);
}

template <class Scalar>
Scalar lambda_star(const Vector<Scalar>& f, const Vector<Scalar>& g,
                   const DiscreteMeasure<Scalar>& alpha,
                   const DiscreteMeasure<Scalar>& beta, double rho1, double rho2) {
  return lambda_star(f, g, alpha.weights(), beta.weights(), rho1, rho2);
}

template <class Scalar>
Scalar lambda_star(const Vector<Scalar>& f, const Vector<Scalar>& g,
                   const Measure1D<Scalar>& mu, const Measure1D<Scalar>& nu,
                   double rho1, double rho2) {
  return lambda_star(f, g, mu.weights(), nu.weights(), rho1, rho2);
}

namespace detail {

// Reweighting factors e^{-(f + lambda)/rho1}, e^{-(g - lambda)/rho2} with
// the usual exponent clamp.
template <class Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> norm_factors(const Vector<Scalar>& f,
                                                       const Vector<Scalar>& g,
                                                       Scalar lambda, double rho1,
                                                       double rho2) {
  Vector<Scalar> fa(f.size()), fb(g.size());
  for (Index i = 0; i < f.size(); ++i)
    fa(i) = clamped_exp(-(f(i) + lambda) / Scalar(rho1));
  for (Index j = 0; j < g.size(); ++j)
    fb(j) = clamped_exp(-(g(j) - lambda) / Scalar(rho2));
  return {std::move(fa), std::move(fb)};
}

// Dual objective at the translated pair (f + lambda, g - lambda).
template <class Scalar>
Scalar dual_objective(const Vector<Scalar>& f, const Vector<Scalar>& g, Scalar lambda,
                      const Vector<Scalar>& wa, const Vector<Scalar>& wb,
                      const DivergenceSpec& div1, const DivergenceSpec& div2) {
  Scalar acc = Scalar(0);
  for (Index i = 0; i < f.size(); ++i)
    if (wa(i) > Scalar(0)) acc += wa(i) * phi_circ(div1, f(i) + lambda);
  for (Index j = 0; j < g.size(); ++j)
    if (wb(j) > Scalar(0)) acc += wb(j) * phi_circ(div2, g(j) - lambda);
  return acc;
}

}  // namespace detail

// Mass-balancing reweighting of the input pair: the translated exponential
// factors applied atom-wise. Output masses agree up to rounding.
template <class Scalar>
std::pair<DiscreteMeasure<Scalar>, DiscreteMeasure<Scalar>> norm(
    const DiscreteMeasure<Scalar>& alpha, const DiscreteMeasure<Scalar>& beta,
    const Vector<Scalar>& f, const Vector<Scalar>& g, double rho1, double rho2) {
  const Scalar lambda = lambda_star(f, g, alpha, beta, rho1, rho2);
  auto factors = detail::norm_factors(f, g, lambda, rho1, rho2);
  return {reweight(alpha, factors.first), reweight(beta, factors.second)};
}

template <class Scalar>
std::pair<Measure1D<Scalar>, Measure1D<Scalar>> norm(const Measure1D<Scalar>& mu,
                                                     const Measure1D<Scalar>& nu,
                                                     const Vector<Scalar>& f,
                                                     const Vector<Scalar>& g,
                                                     double rho1, double rho2) {
  const Scalar lambda = lambda_star(f, g, mu, nu, rho1, rho2);
  auto factors = detail::norm_factors(f, g, lambda, rho1, rho2);
  return {reweight(mu, factors.first), reweight(nu, factors.second)};
}

// Convex step toward the linear-oracle point with the open-loop schedule
// gamma = 2 / (2 + t + 1) at step counter t.
template <class Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> fw_step(const Vector<Scalar>& f,
                                                  const Vector<Scalar>& g,
                                                  const Vector<Scalar>& r,
                                                  const Vector<Scalar>& s, int t) {
  if (f.size() != r.size() || g.size() != s.size())
    throw std::invalid_argument("fw_step: shape mismatch");
  if (t < 0) throw std::invalid_argument("fw_step: negative step counter");
  const Scalar gamma = Scalar(2) / Scalar(2 + t + 1);
  return {f + gamma * (r - f), g + gamma * (s - g)};
}

template <class Scalar>
struct Uot1dResult {
  Scalar value = Scalar(0);
  DualPotentials<Scalar> potentials;  // translated: feasible for the plain dual
  std::vector<Scalar> trace;          // dual objective after each step
};

// Unbalanced transport on the line by Frank-Wolfe ascent of the
// translation-invariant dual: reweight, solve the balanced 1D problem,
// step. Inputs must be sorted; the KL setting is required. The reported
// value is the dual objective at the translated final pair.
template <class Scalar>
Uot1dResult<Scalar> uot1d(const Measure1D<Scalar>& mu, const Measure1D<Scalar>& nu,
                          const UnbalancedParams& params) {
  require_kl_setting(params);
  if (!mu.sorted() || !nu.sorted())
    throw std::invalid_argument("uot1d: inputs must be sorted");
  if (!(mass(mu) > Scalar(0)) || !(mass(nu) > Scalar(0)))
    throw std::invalid_argument("uot1d: zero-mass input");
  const double rho1 = params.div1.rho;
  const double rho2 = params.div2.rho;
  const Vector<Scalar>& wa = mu.weights();
  const Vector<Scalar>& wb = nu.weights();

  Uot1dResult<Scalar> result;
  Vector<Scalar> f = Vector<Scalar>::Zero(mu.size());
  Vector<Scalar> g = Vector<Scalar>::Zero(nu.size());
  result.trace.reserve(static_cast<std::size_t>(params.fw_iters));
  bool stopped_early = false;
  for (int t = 0; t < params.fw_iters; ++t) {
    const Scalar lambda = lambda_star(f, g, wa, wb, rho1, rho2);
    if (t > 0)
      result.trace.push_back(
          detail::dual_objective(f, g, lambda, wa, wb, params.div1, params.div2));
    if (params.fw_tol > 0.0 && result.trace.size() >= 2) {
      const Scalar gain = result.trace[result.trace.size() - 1] -
                          result.trace[result.trace.size() - 2];
      if (std::abs(static_cast<double>(gain)) < params.fw_tol) {
        stopped_early = true;
        break;
      }
    }
    auto factors = detail::norm_factors(f, g, lambda, rho1, rho2);
    Vector<Scalar> r, s;
    detail::northwest_chain(mu.positions(), wa.cwiseProduct(factors.first).eval(),
                            nu.positions(), wb.cwiseProduct(factors.second).eval(),
                            params.p, &r, &s);
    auto stepped = fw_step(f, g, r, s, t);
    f = std::move(stepped.first);
    g = std::move(stepped.second);
  }
  const Scalar lambda = lambda_star(f, g, wa, wb, rho1, rho2);
  if (!stopped_early)
    result.trace.push_back(
        detail::dual_objective(f, g, lambda, wa, wb, params.div1, params.div2));
  result.value = result.trace.back();
  result.potentials.f = f.array() + lambda;
  result.potentials.g = g.array() - lambda;
  return result;
}

}  // namespace uslice
