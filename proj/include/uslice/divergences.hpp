#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "uslice/numerics.hpp"
#include "uslice/types.hpp"

namespace uslice {

inline void validate(const DivergenceSpec& spec) {
  if (spec.kind != DivergenceKind::Balanced &&
      !(std::isfinite(spec.rho) && spec.rho > 0.0))
    throw std::invalid_argument("DivergenceSpec: rho must be finite and > 0");
}

inline bool is_kl(const DivergenceSpec& spec) { return spec.kind == DivergenceKind::KL; }

// The solvers ascend a dual whose integrands are these concave transforms.
//   KL:       rho * (1 - e^{-x/rho}), saturating at rho
//   Balanced: identity (hard marginal constraint)
//   TV:       x on [-rho, rho], rho above, -inf below; evaluation only
template <class Scalar>
Scalar phi_circ(const DivergenceSpec& spec, Scalar x) {
  if (!std::isfinite(static_cast<double>(x)))
    throw std::invalid_argument("phi_circ: non-finite argument");
  switch (spec.kind) {
    case DivergenceKind::Balanced:
      return x;
    case DivergenceKind::TV: {
      const Scalar rho = static_cast<Scalar>(spec.rho);
      if (x < -rho) return -std::numeric_limits<Scalar>::infinity();
      return x < rho ? x : rho;
    }
    case DivergenceKind::KL:
    default: {
      const Scalar rho = static_cast<Scalar>(spec.rho);
      return rho * (Scalar(1) - clamped_exp(-x / rho));
    }
  }
}

// rho * KL(pi | alpha) between two weightings of a common support, with
// 0 log 0 = 0. Absolute-continuity failures return +inf rather than throw:
// pi puts mass where alpha has none.
template <class DerivedP, class DerivedA>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& pi,
                                        const Eigen::MatrixBase<DerivedA>& alpha,
                                        typename DerivedP::Scalar rho) {
  using Scalar = typename DerivedP::Scalar;
  if (pi.size() != alpha.size())
    throw std::invalid_argument("kl_divergence: size mismatch");
  Scalar acc = Scalar(0);
  for (Index i = 0; i < pi.size(); ++i) {
    const Scalar p = pi(i);
    const Scalar a = alpha(i);
    if (p > Scalar(0)) {
      if (!(a > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
      acc += p * std::log(p / a) - p + a;
    } else {
      acc += a;
    }
  }
  return rho * acc;
}

// rho * total variation between two weightings of a common support.
template <class DerivedP, class DerivedA>
typename DerivedP::Scalar tv_divergence(const Eigen::MatrixBase<DerivedP>& pi,
                                        const Eigen::MatrixBase<DerivedA>& alpha,
                                        typename DerivedP::Scalar rho) {
  if (pi.size() != alpha.size())
    throw std::invalid_argument("tv_divergence: size mismatch");
  return rho * (pi.derived().array() - alpha.derived().array()).abs().sum();
}

inline void validate(const UnbalancedParams& params) {
  validate(params.div1);
  validate(params.div2);
  if (!(params.p >= 1.0) || !std::isfinite(params.p))
    throw std::invalid_argument("UnbalancedParams: p must be finite and >= 1");
  if (params.n_projections < 1)
    throw std::invalid_argument("UnbalancedParams: n_projections must be >= 1");
  if (params.fw_iters < 1)
    throw std::invalid_argument("UnbalancedParams: fw_iters must be >= 1");
  if (params.fw_tol < 0.0)
    throw std::invalid_argument("UnbalancedParams: fw_tol must be >= 0");
}

// The Frank-Wolfe path needs a smooth dual transform; only KL qualifies here.
inline void require_kl_setting(const UnbalancedParams& params) {
  validate(params);
  if (!is_kl(params.div1) || !is_kl(params.div2))
    throw std::runtime_error("FW requires smooth phi: use KL divergences");
}

}  // namespace uslice
