#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "uslice/oracle.hpp"
#include "uslice/ot1d.hpp"

using namespace uslice;
using testsupport::dirac1d;

namespace {

Measure1D<double> shuffled(const Measure1D<double>& m, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(m.size()));
  std::iota(perm.begin(), perm.end(), Index(0));
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::VectorXd pos(m.size()), w(m.size());
  for (Index i = 0; i < m.size(); ++i) {
    pos(i) = m.positions()(perm[static_cast<std::size_t>(i)]);
    w(i) = m.weights()(perm[static_cast<std::size_t>(i)]);
  }
  return Measure1D<double>(pos, w, false);
}

Measure1D<double> sort_measure(const Measure1D<double>& m) {
  std::vector<Index> perm(static_cast<std::size_t>(m.size()));
  std::iota(perm.begin(), perm.end(), Index(0));
  std::stable_sort(perm.begin(), perm.end(), [&](Index a, Index b) {
    return m.positions()(a) < m.positions()(b);
  });
  Eigen::VectorXd pos(m.size()), w(m.size());
  for (Index i = 0; i < m.size(); ++i) {
    pos(i) = m.positions()(perm[static_cast<std::size_t>(i)]);
    w(i) = m.weights()(perm[static_cast<std::size_t>(i)]);
  }
  return Measure1D<double>(pos, w, true);
}

}  // namespace

TEST_SUITE("ot1d") {

TEST_CASE("hand instances") {
  CHECK(ot1d_loss(dirac1d(0.0, 1.0), dirac1d(1.0, 1.0), 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(1);
  const auto mu = testsupport::random_sorted_measure(rng, 9);
  CHECK(ot1d_loss(mu, mu, 2.0) == doctest::Approx(0.0).epsilon(1e-15));

  Eigen::VectorXd pos(2), w(2);
  pos << 0.0, 2.0;
  w << 0.5, 0.5;
  const Measure1D<double> split(pos, w, true);
  const auto atom = dirac1d(1.0, 1.0);
  CHECK(ot1d_loss(split, atom, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ot1d_loss(split, atom, 1.0) ==
        doctest::Approx(lp_ot(split, atom, 1.0)).epsilon(1e-12));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(ot1d_loss(dirac1d(0.0, 1.0), dirac1d(1.0, 2.0), 2.0),
                  std::runtime_error);
  CHECK_THROWS_WITH_AS(ot1d_loss(dirac1d(0.0, 1.0), dirac1d(1.0, 2.0), 2.0),
                       doctest::Contains("balanced"), std::runtime_error);
  Eigen::VectorXd pos(2), w(2);
  pos << 1.0, 0.0;
  w << 0.5, 0.5;
  const Measure1D<double> unsorted(pos, w, false);
  CHECK_THROWS_AS(ot1d_loss(unsorted, dirac1d(0.0, 1.0), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(ot1d_loss(dirac1d(0.0, 1.0), dirac1d(0.0, 1.0), 0.5),
                  std::invalid_argument);
}

TEST_CASE("dual examples") {
  const auto same = ot1d_duals(dirac1d(0.0, 1.0), dirac1d(0.0, 1.0), 2.0);
  CHECK(same.first == doctest::Approx(0.0));
  CHECK(same.second.f(0) == 0.0);
  CHECK(same.second.g(0) == doctest::Approx(0.0));

  const auto apart = ot1d_duals(dirac1d(0.0, 1.0), dirac1d(1.0, 1.0), 2.0);
  CHECK(apart.second.f(0) == 0.0);
  CHECK(apart.second.g(0) == doctest::Approx(1.0));

  Eigen::VectorXd pos(2), w(2);
  pos << 0.0, 2.0;
  w << 0.5, 0.5;
  const auto duals = ot1d_duals(Measure1D<double>(pos, w, true), dirac1d(1.0, 1.0), 1.0);
  const double dual_value = duals.second.f.dot(w) + duals.second.g(0) * 1.0;
  CHECK(dual_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matches the LP oracle with tight duality on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 64);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = size(rng);
    const Index m = size(rng);
    auto mu = testsupport::random_sorted_measure(rng, n, 2.0);
    auto nu = testsupport::random_sorted_measure(rng, m, 2.0, 0.5);
    nu = testsupport::with_mass(nu, mass(mu));
    const double p = (trial % 2 == 0) ? 1.0 : 2.0;

    const double reference = lp_ot(mu, nu, p);
    const auto [value, duals] = ot1d_duals(mu, nu, p);
    CHECK(std::abs(value - reference) <= 1e-9 * (1.0 + std::abs(reference)));

    const double dual_value =
        duals.f.dot(mu.weights()) + duals.g.dot(nu.weights());
    CHECK(std::abs(dual_value - value) <= 1e-9 * (1.0 + std::abs(value)));
  }
}

TEST_CASE("dual feasibility holds on all pairs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 1 + trial % 13;
    const Index m = 1 + (trial * 7) % 11;
    auto mu = testsupport::random_sorted_measure(rng, n);
    auto nu = testsupport::with_mass(testsupport::random_sorted_measure(rng, m),
                                     mass(mu));
    // sprinkle zero-weight atoms; their potentials must stay feasible too
    if (n > 2) {
      Eigen::VectorXd w = mu.weights();
      w(trial % n) = 0.0;
      mu = Measure1D<double>(mu.positions(), w, true);
      nu = testsupport::with_mass(nu, mass(mu));
    }
    const double p = (trial % 3 == 0) ? 1.0 : ((trial % 3 == 1) ? 1.7 : 2.0);
    const auto [value, duals] = ot1d_duals(mu, nu, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) {
        const double cost =
            std::pow(std::abs(mu.positions()(i) - nu.positions()(j)), p);
        CHECK(duals.f(i) + duals.g(j) <= cost + 1e-9);
      }
    CHECK(value >= -1e-12);
  }
}

TEST_CASE("permutation invariance of the loss") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    auto mu = testsupport::random_sorted_measure(rng, 2 + trial % 10);
    auto nu = testsupport::with_mass(
        testsupport::random_sorted_measure(rng, 2 + (trial * 3) % 10), mass(mu));
    const double base = ot1d_loss(mu, nu, 2.0);
    const double shuffled_value =
        ot1d_loss(sort_measure(shuffled(mu, rng)), sort_measure(shuffled(nu, rng)), 2.0);
    CHECK(shuffled_value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("triangle inequality at p=1") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    auto mu = testsupport::random_sorted_measure(rng, 2 + trial % 8);
    auto nu = testsupport::with_mass(
        testsupport::random_sorted_measure(rng, 2 + (trial * 5) % 8), mass(mu));
    auto kappa = testsupport::with_mass(
        testsupport::random_sorted_measure(rng, 2 + (trial * 11) % 8), mass(mu));
    const double direct = ot1d_loss(mu, nu, 1.0);
    const double via =
        ot1d_loss(mu, kappa, 1.0) + ot1d_loss(kappa, nu, 1.0);
    CHECK(direct <= via + 1e-10);
  }
}

TEST_CASE("sliced loss examples") {
  std::mt19937_64 rng(8);
  const auto alpha = testsupport::random_cloud(rng, 6, 2);
  const auto dirs = sample_directions(2, 16, 5);
  CHECK(sliced_ot_loss(alpha, alpha, dirs, 2.0) == doctest::Approx(0.0).epsilon(1e-12));

  // d = 1: every +-1 slice sees the same |0 - 1|^2
  Eigen::MatrixXd p0(1, 1), p1(1, 1);
  p0 << 0.0;
  p1 << 1.0;
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  const DiscreteMeasure<double> d0(p0, one), d1(p1, one);
  const auto line = sample_directions(1, 8, 11);
  CHECK(sliced_ot_loss(d0, d1, line, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(
      sliced_ot_loss(d0, DiscreteMeasure<double>(p1, one * 2.0), line, 2.0),
      std::runtime_error);
}

TEST_CASE("sliced loss equals the per-slice LP average") {
  std::mt19937_64 rng(12);
  const auto alpha = testsupport::random_cloud(rng, 4, 2);
  const auto beta =
      testsupport::with_mass(testsupport::random_cloud(rng, 4, 2, 1.0, 0.3), mass(alpha));
  const auto dirs = sample_directions(2, 64, 77);
  double expected = 0.0;
  for (Index k = 0; k < dirs.count(); ++k) {
    const auto pa = project(alpha, dirs.directions().row(k).transpose());
    const auto pb = project(beta, dirs.directions().row(k).transpose());
    expected += lp_ot(pa.line, pb.line, 2.0);
  }
  expected /= static_cast<double>(dirs.count());
  const double got = sliced_ot_loss(alpha, beta, dirs, 2.0);
  CHECK(std::abs(got - expected) <= 1e-9 * (1.0 + std::abs(expected)));
}

}  // TEST_SUITE
