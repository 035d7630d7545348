#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "uslice/fw_core.hpp"
#include "uslice/oracle.hpp"

using namespace uslice;
using testsupport::dirac1d;

namespace {

// Independent maximizer of the translated dual objective: golden-section
// localizes the flat top, then bisection on the analytic slope (plain
// exponential sums, no log-domain trick) pins the argmax.
double golden_section_lambda(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                             const Eigen::VectorXd& wa, const Eigen::VectorXd& wb,
                             double rho1, double rho2) {
  const DivergenceSpec d1{DivergenceKind::KL, rho1};
  const DivergenceSpec d2{DivergenceKind::KL, rho2};
  auto objective = [&](double lam) {
    return detail::dual_objective(f, g, lam, wa, wb, d1, d2);
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -10.0, hi = 10.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-4) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  auto slope = [&](double lam) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
      s += wa(i) * std::exp(-(f(i) + lam) / rho1);
    for (Eigen::Index j = 0; j < g.size(); ++j)
      s -= wb(j) * std::exp(-(g(j) - lam) / rho2);
    return s;
  };
  lo -= 1e-3;
  hi += 1e-3;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

UnbalancedParams kl_params(double rho, double p = 2.0, int fw_iters = 20) {
  UnbalancedParams params;
  params.div1 = {DivergenceKind::KL, rho};
  params.div2 = {DivergenceKind::KL, rho};
  params.p = p;
  params.fw_iters = fw_iters;
  return params;
}

}  // namespace

TEST_SUITE("fw_core") {

TEST_CASE("lambda_star closed form") {
  Eigen::VectorXd z2 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  CHECK(lambda_star(z2, z2, w, w, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

  // masses e and 1 with rho1 = rho2 = 1: lambda = (1/2) log e
  Eigen::VectorXd wa(1), wb(1);
  wa << std::exp(1.0);
  wb << 1.0;
  Eigen::VectorXd z1 = Eigen::VectorXd::Zero(1);
  CHECK(lambda_star(z1, z1, wa, wb, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-13));

  Eigen::VectorXd zero_mass = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(lambda_star(z1, z1, wa, zero_mass, 1.0, 1.0), std::runtime_error);
}

TEST_CASE("lambda_star agrees with a scalar search") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd f(5), g(5), wa(5), wb(5);
    for (int i = 0; i < 5; ++i) {
      f(i) = dist(rng);
      g(i) = dist(rng);
      wa(i) = 0.2 + std::abs(dist(rng));
      wb(i) = 0.2 + std::abs(dist(rng));
    }
    const double rho1 = 2.0, rho2 = 3.0;
    const double closed = lambda_star(f, g, wa, wb, rho1, rho2);
    const double searched = golden_section_lambda(f, g, wa, wb, rho1, rho2);
    CHECK(std::abs(closed - searched) <= 1e-8);
    // first-order condition: reweighted masses coincide at lambda*
    double ma = 0, mb = 0;
    for (int i = 0; i < 5; ++i) {
      ma += wa(i) * std::exp(-(f(i) + closed) / rho1);
      mb += wb(i) * std::exp(-(g(i) - closed) / rho2);
    }
    CHECK(std::abs(ma - mb) <= 1e-9 * (1.0 + std::abs(ma)));
  }
}

TEST_CASE("norm balances the masses") {
  std::mt19937_64 rng(5);
  // zero potentials and equal masses leave the pair untouched
  const auto mu = testsupport::random_sorted_measure(rng, 6);
  const auto nu = testsupport::with_mass(
      testsupport::random_sorted_measure(rng, 4, 1.0, 0.2), mass(mu));
  Eigen::VectorXd fz = Eigen::VectorXd::Zero(6), gz = Eigen::VectorXd::Zero(4);
  const auto same = norm(mu, nu, fz, gz, 1.0, 1.0);
  CHECK((same.first.weights() - mu.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((same.second.weights() - nu.weights()).cwiseAbs().maxCoeff() <= 1e-12);

  // masses 4 and 1 settle at the geometric mean 2
  const auto heavy = testsupport::with_mass(mu, 4.0);
  const auto light = testsupport::with_mass(nu, 1.0);
  const auto balanced = norm(heavy, light, fz, gz, 1.5, 1.5);
  CHECK(mass(balanced.first) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(mass(balanced.second) == doctest::Approx(2.0).epsilon(1e-12));

  // random potentials still balance
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd f(6), g(4);
    for (int i = 0; i < 6; ++i) f(i) = dist(rng);
    for (int j = 0; j < 4; ++j) g(j) = dist(rng);
    const auto pair = norm(heavy, light, f, g, 2.0, 0.7);
    const double ma = mass(pair.first);
    const double mb = mass(pair.second);
    CHECK(std::abs(ma - mb) <= 1e-9 * (1.0 + std::abs(ma)));
  }
}

TEST_CASE("fw_step schedule and fixed points") {
  Eigen::VectorXd f(2), g(2), r(2), s(2);
  f << 1.0, 2.0;
  g << -1.0, 0.5;
  r << 4.0, 5.0;
  s << 2.0, 2.0;
  const auto stepped = fw_step(f, g, r, s, 0);  // gamma = 2/3
  CHECK(stepped.first(0) == doctest::Approx(1.0 / 3.0 + 8.0 / 3.0).epsilon(1e-15));
  CHECK(stepped.second(1) == doctest::Approx(0.5 / 3.0 + 4.0 / 3.0).epsilon(1e-15));

  const auto fixed = fw_step(f, g, f, g, 3);
  CHECK(fixed.first == f);  // exact: x + gamma (x - x)
  CHECK(fixed.second == g);

  const auto late = fw_step(f, g, r, s, 1000000);
  CHECK((late.first - f).cwiseAbs().maxCoeff() <= 1e-4);

  Eigen::VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_AS(fw_step(f, g, bad, s, 0), std::invalid_argument);
}

TEST_CASE("uot1d identity and divergence guards") {
  std::mt19937_64 rng(9);
  const auto mu = testsupport::random_sorted_measure(rng, 5);
  auto params = kl_params(1.0, 2.0, 5000);
  const auto result = uot1d(mu, mu, params);
  CHECK(std::abs(result.value) <= 1e-9);
  CHECK(result.potentials.f.cwiseAbs().maxCoeff() <= 1e-4);

  params.div1.kind = DivergenceKind::TV;
  CHECK_THROWS_AS(uot1d(mu, mu, params), std::runtime_error);
  params.div1.kind = DivergenceKind::Balanced;
  CHECK_THROWS_AS(uot1d(mu, mu, params), std::runtime_error);
}

TEST_CASE("uot1d mass-only closed form") {
  // colocated atoms: only the mass penalty is active
  for (double b : {0.25, 0.5, 2.0}) {
    for (double rho : {0.5, 1.0, 3.0}) {
      auto params = kl_params(rho, 2.0, 50);
      const auto result = uot1d(dirac1d(0.0, 1.0), dirac1d(0.0, b), params);
      const double expected = rho * std::pow(1.0 - std::sqrt(b), 2);
      CHECK(result.value == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("uot1d agrees with the entropic oracle") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 8; ++trial) {
    const auto mu = testsupport::random_sorted_measure(rng, 5);
    const auto nu = testsupport::random_sorted_measure(rng, 7, 1.0, 0.75);
    auto params = kl_params(1.0, 2.0, 200);
    const auto fw = uot1d(mu, nu, params);

    Eigen::MatrixXd cost(5, 7);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 7; ++j)
        cost(i, j) = std::pow(mu.positions()(i) - nu.positions()(j), 2);
    const auto entropic =
        sinkhorn_uot(mu.weights(), nu.weights(), cost, 1.0, 1.0, 1e-4, 2000000);
    CHECK(std::abs(fw.value - entropic.value) <=
          1e-3 * (1.0 + std::abs(entropic.value)));
  }
}

TEST_CASE("uot1d respects the mass lower bound") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const auto mu = testsupport::random_sorted_measure(rng, 2 + trial % 7);
    const auto nu =
        testsupport::random_sorted_measure(rng, 2 + (trial * 3) % 7, 1.0, 0.4);
    const double rho = (trial % 2 == 0) ? 0.7 : 2.0;
    auto params = kl_params(rho, 2.0, 100);
    const auto result = uot1d(mu, nu, params);
    const double bound = rho * std::pow(std::sqrt(mass(mu)) - std::sqrt(mass(nu)), 2);
    CHECK(result.value >= bound - 1e-9);
  }
}

TEST_CASE("dual objective increases between the endpoints") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = testsupport::random_sorted_measure(rng, 6);
    const auto nu = testsupport::random_sorted_measure(rng, 5, 1.0, 0.6);
    auto params = kl_params(1.0, 2.0, 200);
    const auto result = uot1d(mu, nu, params);
    REQUIRE(result.trace.size() == 200);
    CHECK(result.trace[199] >= result.trace[4] - 1e-9);
  }
}

TEST_CASE("trace prefix matches shorter runs exactly") {
  std::mt19937_64 rng(60);
  const auto mu = testsupport::random_sorted_measure(rng, 6);
  const auto nu = testsupport::random_sorted_measure(rng, 4, 1.0, 0.3);
  auto long_params = kl_params(0.8, 2.0, 100);
  auto short_params = kl_params(0.8, 2.0, 17);
  const auto long_run = uot1d(mu, nu, long_params);
  const auto short_run = uot1d(mu, nu, short_params);
  CHECK(long_run.trace[16] == short_run.value);
}

TEST_CASE("fw_tol stops early") {
  std::mt19937_64 rng(61);
  const auto mu = testsupport::random_sorted_measure(rng, 6);
  const auto nu = testsupport::random_sorted_measure(rng, 4, 1.0, 0.3);
  auto params = kl_params(0.8, 2.0, 100000);
  params.fw_tol = 1e-10;
  const auto result = uot1d(mu, nu, params);
  CHECK(result.trace.size() < 100000);
  auto full = kl_params(0.8, 2.0, 2000);
  const auto reference = uot1d(mu, nu, full);
  CHECK(result.value == doctest::Approx(reference.value).epsilon(1e-6));
}

TEST_CASE("uot1d dual potentials are feasible for the translated dual") {
  std::mt19937_64 rng(77);
  const auto mu = testsupport::random_sorted_measure(rng, 6);
  const auto nu = testsupport::random_sorted_measure(rng, 5, 1.0, 0.5);
  auto params = kl_params(1.0, 2.0, 300);
  const auto result = uot1d(mu, nu, params);
  for (Index i = 0; i < mu.size(); ++i)
    for (Index j = 0; j < nu.size(); ++j) {
      const double cost = std::pow(mu.positions()(i) - nu.positions()(j), 2.0);
      CHECK(result.potentials.f(i) + result.potentials.g(j) <= cost + 1e-9);
    }
}

}  // TEST_SUITE
