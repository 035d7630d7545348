#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace uslice {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Divergence penalizing the deviation of a reweighting from its reference
// measure. Balanced encodes the hard marginal constraint and ignores rho.
enum class DivergenceKind { KL, TV, Balanced };

struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::KL;
  double rho = 1.0;
};

// Shared knob set for the sliced unbalanced solvers.
struct UnbalancedParams {
  DivergenceSpec div1;
  DivergenceSpec div2;
  double p = 2.0;              // cost exponent, |x - y|^p on the line
  int n_projections = 500;     // K
  int fw_iters = 20;           // F
  std::uint64_t seed = 0;
  double fw_tol = 0.0;         // > 0 stops early once the dual gain drops below it
};

}  // namespace uslice
