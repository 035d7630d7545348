#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "uslice/types.hpp"

namespace uslice {

// Exponent arguments are clamped to +-700 so exp never overflows a double;
// results inside the attainable range are untouched.
inline constexpr double kExpClamp = 700.0;

template <class Scalar>
Scalar clamped_exp(Scalar x) {
  const Scalar hi = static_cast<Scalar>(kExpClamp);
  if (x > hi) x = hi;
  if (x < -hi) x = -hi;
  return std::exp(x);
}

// log of the integral of e^{s} against nonnegative atom weights w,
// max-shifted for stability. Zero-weight atoms are excluded; if every
// weight is zero the result is -inf.
template <class DerivedS, class DerivedW>
typename DerivedS::Scalar log_integral_exp(const Eigen::MatrixBase<DerivedS>& s,
                                           const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedS::Scalar;
  if (s.size() != w.size())
    throw std::invalid_argument("log_integral_exp: size mismatch");
  Scalar shift = -std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < s.size(); ++i)
    if (w(i) > Scalar(0) && s(i) > shift) shift = s(i);
  if (!(shift > -std::numeric_limits<Scalar>::infinity()))
    return -std::numeric_limits<Scalar>::infinity();
  Scalar acc = Scalar(0);
  for (Index i = 0; i < s.size(); ++i)
    if (w(i) > Scalar(0)) acc += w(i) * std::exp(s(i) - shift);
  return shift + std::log(acc);
}

// splitmix64 round; used to derive independent deterministic substreams
// (per pair, per iteration) from one user-facing seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Standard normal stream: mt19937_64 bits mapped to (0,1] and fed through
// Box-Muller. Fully determined by the seed.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : state_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double next_unit() {
    // 53-bit mantissa draw in (0, 1]; never 0, so log stays finite.
    return static_cast<double>((state_() >> 11) + 1) * 0x1.0p-53;
  }

  std::mt19937_64 state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace uslice
