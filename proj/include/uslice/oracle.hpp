#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "uslice/divergences.hpp"
#include "uslice/measures.hpp"
#include "uslice/numerics.hpp"
#include "uslice/ot1d.hpp"
#include "uslice/types.hpp"

// Reference solvers used for validation. They are deliberately independent
// of the Frank-Wolfe path and of the quantile/north-west machinery: lp_ot
// solves the transportation LP by successive shortest paths on the residual
// bipartite graph, sinkhorn_uot runs log-domain scaling iterations with KL
// marginal penalties and an annealed regularization.

namespace uslice {

namespace detail {

// Dense transportation LP, exact optimum. Supplies `a`, demands `b` with
// equal totals; Dijkstra on reduced costs keeps potentials feasible, and
// reduced costs are floored at zero to absorb rounding.
template <class Scalar>
Scalar transport_lp(const Matrix<Scalar>& cost, const Vector<Scalar>& a,
                    const Vector<Scalar>& b) {
  const Index n = a.size();
  const Index m = b.size();
  if (cost.rows() != n || cost.cols() != m)
    throw std::invalid_argument("lp_ot: cost matrix shape mismatch");
  if (n * m > 10000)
    throw std::invalid_argument("lp_ot: size cap exceeded (n*m must be <= 10^4)");
  require_balanced(a.sum(), b.sum(), "lp_ot");

  const Scalar total = a.sum();
  if (!(total > Scalar(0))) return Scalar(0);
  const Scalar exhausted = Scalar(1e-14) * total;
  const Index v = n + m;  // node u < n: supply atom; node n + j: demand atom
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  Matrix<Scalar> flow = Matrix<Scalar>::Zero(n, m);
  Vector<Scalar> pot = Vector<Scalar>::Zero(v);
  Vector<Scalar> ra = a;
  Vector<Scalar> rb = b;
  Vector<Scalar> dist(v);
  std::vector<Index> parent(static_cast<std::size_t>(v));
  std::vector<char> done(static_cast<std::size_t>(v));

  Scalar remaining = total;
  const Index max_augment = 16 * v + 64;
  for (Index round = 0; remaining > Scalar(1e-12) * total; ++round) {
    if (round >= max_augment)
      throw std::runtime_error("lp_ot: augmentation cap hit, numerical trouble");
    dist.setConstant(inf);
    std::fill(parent.begin(), parent.end(), Index(-1));
    std::fill(done.begin(), done.end(), char(0));
    for (Index i = 0; i < n; ++i)
      if (ra(i) > exhausted) dist(i) = Scalar(0);
    for (Index it = 0; it < v; ++it) {
      Index u = -1;
      Scalar best = inf;
      for (Index w = 0; w < v; ++w)
        if (!done[static_cast<std::size_t>(w)] && dist(w) < best) {
          best = dist(w);
          u = w;
        }
      if (u < 0) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u < n) {
        for (Index j = 0; j < m; ++j) {
          const Scalar rc = std::max(Scalar(0), cost(u, j) + pot(u) - pot(n + j));
          if (dist(u) + rc < dist(n + j)) {
            dist(n + j) = dist(u) + rc;
            parent[static_cast<std::size_t>(n + j)] = u;
          }
        }
      } else {
        const Index j = u - n;
        for (Index i = 0; i < n; ++i) {
          if (!(flow(i, j) > Scalar(0))) continue;
          const Scalar rc = std::max(Scalar(0), -cost(i, j) + pot(u) - pot(i));
          if (dist(u) + rc < dist(i)) {
            dist(i) = dist(u) + rc;
            parent[static_cast<std::size_t>(i)] = u;
          }
        }
      }
    }
    Index target = -1;
    Scalar best = inf;
    for (Index j = 0; j < m; ++j)
      if (rb(j) > exhausted && dist(n + j) < best) {
        best = dist(n + j);
        target = n + j;
      }
    if (target < 0)
      throw std::runtime_error("lp_ot: no augmenting path found");

    // bottleneck along the path, then push
    Scalar delta = rb(target - n);
    Index node = target;
    while (parent[static_cast<std::size_t>(node)] >= 0) {
      const Index prev = parent[static_cast<std::size_t>(node)];
      if (node >= n)
        delta = std::min(delta, inf);  // forward arc, uncapacitated
      else
        delta = std::min(delta, flow(node, prev - n));
      node = prev;
    }
    delta = std::min(delta, ra(node));
    node = target;
    while (parent[static_cast<std::size_t>(node)] >= 0) {
      const Index prev = parent[static_cast<std::size_t>(node)];
      if (node >= n)
        flow(prev, node - n) += delta;
      else
        flow(node, prev - n) -= delta;
      node = prev;
    }
    ra(node) -= delta;
    rb(target - n) -= delta;
    remaining -= delta;
    const Scalar reach = dist(target);
    for (Index w = 0; w < v; ++w) pot(w) += std::min(dist(w), reach);
  }
  return (flow.array() * cost.array()).sum();
}

template <class Scalar>
Matrix<Scalar> pairwise_power_cost(const Matrix<Scalar>& x, const Matrix<Scalar>& y,
                                   double p) {
  Matrix<Scalar> cost(x.rows(), y.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < y.rows(); ++j) {
      const Scalar d = (x.row(i) - y.row(j)).norm();
      cost(i, j) = (p == 2.0) ? d * d : ((p == 1.0) ? d : std::pow(d, Scalar(p)));
    }
  return cost;
}

}  // namespace detail

template <class Scalar>
Scalar lp_ot(const Matrix<Scalar>& cost, const Vector<Scalar>& a,
             const Vector<Scalar>& b) {
  return detail::transport_lp(cost, a, b);
}

template <class Scalar>
Scalar lp_ot(const Measure1D<Scalar>& mu, const Measure1D<Scalar>& nu, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_ot: p must be >= 1");
  Matrix<Scalar> cost(mu.size(), nu.size());
  for (Index i = 0; i < mu.size(); ++i)
    for (Index j = 0; j < nu.size(); ++j)
      cost(i, j) = detail::line_cost(mu.positions()(i), nu.positions()(j), p);
  return detail::transport_lp(cost, mu.weights(), nu.weights());
}

template <class Scalar>
Scalar lp_ot(const DiscreteMeasure<Scalar>& alpha, const DiscreteMeasure<Scalar>& beta,
             double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_ot: p must be >= 1");
  if (alpha.dim() != beta.dim())
    throw std::invalid_argument("lp_ot: dimension mismatch");
  return detail::transport_lp(detail::pairwise_power_cost(alpha.points(), beta.points(), p),
                              alpha.weights(), beta.weights());
}

struct SinkhornReport {
  double value = 0.0;         // cost + rho1 KL + rho2 KL at the returned plan
  double entropy_term = 0.0;  // eps * KL(plan | a x b), reported separately
  double epsilon = 0.0;       // regularization reached by the annealing
  int iterations = 0;         // scaling sweeps summed over all stages
  double residual = 0.0;      // certified sup-norm potential error at the end
  std::vector<double> stage_values;  // value after each annealing stage
};

// Log-domain scaling iterations for KL-penalized unbalanced transport,
// annealing epsilon by halving from the cost scale down to the target and
// warm-starting potentials across stages. The value reported is the plain
// (unregularized) objective at the entropic plan; the entropy term is kept
// separate. Throws if a stage exceeds max_iters without meeting its
// fixed-point certificate.
template <class Scalar>
SinkhornReport sinkhorn_uot(const Vector<Scalar>& a, const Vector<Scalar>& b,
                            const Matrix<Scalar>& cost, double rho1, double rho2,
                            double epsilon, int max_iters) {
  const Index n = a.size();
  const Index m = b.size();
  if (cost.rows() != n || cost.cols() != m)
    throw std::invalid_argument("sinkhorn_uot: cost matrix shape mismatch");
  if (n * m > 1000000)
    throw std::invalid_argument("sinkhorn_uot: dense cost exceeds size cap");
  if (!(epsilon > 0.0) || !(rho1 > 0.0) || !(rho2 > 0.0))
    throw std::invalid_argument("sinkhorn_uot: epsilon and rho must be > 0");
  if ((a.array() < Scalar(0)).any() || (b.array() < Scalar(0)).any())
    throw std::invalid_argument("sinkhorn_uot: negative weights");
  if (!(a.sum() > Scalar(0)) || !(b.sum() > Scalar(0)))
    throw std::invalid_argument("sinkhorn_uot: zero-mass input");
  if (max_iters < 1) throw std::invalid_argument("sinkhorn_uot: max_iters must be >= 1");

  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> log_a(n), log_b(m);
  for (Index i = 0; i < n; ++i) log_a(i) = a(i) > Scalar(0) ? std::log(a(i)) : neg_inf;
  for (Index j = 0; j < m; ++j) log_b(j) = b(j) > Scalar(0) ? std::log(b(j)) : neg_inf;

  const double cost_scale = cost.cwiseAbs().mean();
  const double stop_scale = 1e-9 * (1.0 + cost.cwiseAbs().maxCoeff() +
                                    std::max(rho1, rho2));

  Vector<Scalar> f = Vector<Scalar>::Zero(n);
  Vector<Scalar> g = Vector<Scalar>::Zero(m);
  SinkhornReport report;

  double eps = std::max(cost_scale, epsilon);

  auto stage_value = [&](double e) {
    // plan, marginals and the unregularized objective at (f, g)
    Scalar cost_term = Scalar(0);
    Scalar cross = Scalar(0);  // sum of plan * (f + g - cost)
    Scalar plan_mass = Scalar(0);
    Vector<Scalar> marg1 = Vector<Scalar>::Zero(n);
    Vector<Scalar> marg2 = Vector<Scalar>::Zero(m);
    for (Index i = 0; i < n; ++i) {
      if (log_a(i) == neg_inf) continue;
      for (Index j = 0; j < m; ++j) {
        if (log_b(j) == neg_inf) continue;
        const Scalar spread = f(i) + g(j) - cost(i, j);
        const Scalar lp = log_a(i) + log_b(j) + spread / Scalar(e);
        const Scalar pij = clamped_exp(lp);
        cost_term += pij * cost(i, j);
        cross += pij * spread;
        plan_mass += pij;
        marg1(i) += pij;
        marg2(j) += pij;
      }
    }
    const Scalar kl1 = kl_divergence(marg1, a, Scalar(rho1));
    const Scalar kl2 = kl_divergence(marg2, b, Scalar(rho2));
    report.entropy_term = static_cast<double>(cross - Scalar(e) * plan_mass +
                                              Scalar(e) * a.sum() * b.sum());
    return static_cast<double>(cost_term + kl1 + kl2);
  };

  while (true) {
    const double tau1 = rho1 / (rho1 + eps);
    const double tau2 = rho2 / (rho2 + eps);
    const double amplify = std::max(rho1, rho2) / eps;  // geometric tail factor
    const Matrix<Scalar> scaled = cost / Scalar(eps);   // fixed within a stage
    const Scalar inv_eps = Scalar(1) / Scalar(eps);
    bool converged = false;
    int sweep = 0;
    Vector<Scalar> row_buf(m), col_buf(n);
    for (; sweep < max_iters; ++sweep) {
      double delta = 0.0;
      for (Index i = 0; i < n; ++i) {
        row_buf = log_b + g * inv_eps - scaled.row(i).transpose();
        const Scalar shift = row_buf.maxCoeff();
        const Scalar lse = shift + std::log((row_buf.array() - shift).exp().sum());
        const Scalar next = Scalar(-tau1 * eps) * lse;
        delta = std::max(delta, std::abs(static_cast<double>(next - f(i))));
        f(i) = next;
      }
      for (Index j = 0; j < m; ++j) {
        col_buf = log_a + f * inv_eps - scaled.col(j);
        const Scalar shift = col_buf.maxCoeff();
        const Scalar lse = shift + std::log((col_buf.array() - shift).exp().sum());
        const Scalar next = Scalar(-tau2 * eps) * lse;
        delta = std::max(delta, std::abs(static_cast<double>(next - g(j))));
        g(j) = next;
      }
      report.residual = amplify * delta;
      if (report.residual <= stop_scale) {
        converged = true;
        ++sweep;
        break;
      }
    }
    report.iterations += sweep;
    if (!converged) {
      std::ostringstream msg;
      msg << "sinkhorn_uot: stage at epsilon=" << eps << " did not converge after "
          << max_iters << " sweeps (certified residual " << report.residual << ")";
      throw std::runtime_error(msg.str());
    }
    report.stage_values.push_back(stage_value(eps));
    report.epsilon = eps;
    if (eps <= epsilon * (1.0 + 1e-12)) break;
    eps = std::max(eps / 2.0, epsilon);
  }
  report.value = report.stage_values.back();
  return report;
}

template <class Scalar>
SinkhornReport sinkhorn_uot(const DiscreteMeasure<Scalar>& alpha,
                            const DiscreteMeasure<Scalar>& beta,
                            const Matrix<Scalar>& cost, double rho1, double rho2,
                            double epsilon, int max_iters) {
  return sinkhorn_uot(alpha.weights(), beta.weights(), cost, rho1, rho2, epsilon,
                      max_iters);
}

}  // namespace uslice
