#pragma once

#include <cstddef>
#include <vector>

#include "dosp/graph.hpp"
#include "dosp/metrics.hpp"
#include "dosp/problem.hpp"
#include "dosp/state.hpp"

namespace dosp {

// ||x_i - x_j||^2 - gamma
double proximity_constraint(const Vec& xi, const Vec& xj, double gamma);

// f0i(t,x_i) + lambda_i' f_i(t,x_i) + sum_{j in N_i} mu_ij (||x_i - x_j||^2 - gamma)
template <class View>
double local_lagrangian(const View& s, const ProblemSpec& p, const Graph& g,
                        std::size_t i) {
  const double t = s.time();
  const Vec& xi = s.x(i);
  double value = p.env->cost(i, t, xi);
  if (p.constraint_count(i) > 0) value += s.lambda(i).dot(p.env->constraints(i, t, xi));
  auto nbrs = g.neighbors(i);
  for (std::size_t slot = 0; slot < nbrs.size(); ++slot) {
    value += s.mu(i, slot) * proximity_constraint(xi, s.x(nbrs[slot]), p.gamma);
  }
  return value;
}

double local_lagrangian(const SystemState& s, const ProblemSpec& p,
                        const Graph& g, std::size_t i);

// Full time-varying Lagrangian, assembled term by term rather than as a sum of
// local Lagrangians.
double lagrangian(const SystemState& s, const ProblemSpec& p, const Graph& g);

// -eps * (d f0i + sum_k lambda_ik d f_ik + sum_j 2 c_ij (x_i - x_j)) with
// c_ij = mu_ij + mu_ji (full) or mu_ij (local only). Reads only agent i's own
// variables and its neighbors' x_j and mu_ji.
template <class View>
Vec primal_field(const View& s, const ProblemSpec& p, const Graph& g,
                 std::size_t i, double epsilon,
                 PrimalCoupling coupling = PrimalCoupling::kFullLagrangian) {
  const double t = s.time();
  const Vec& xi = s.x(i);
  Vec grad = p.env->cost_subgradient(i, t, xi);
  const std::size_t m = p.constraint_count(i);
  if (m > 0) {
    const Vec& lam = s.lambda(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double w = lam[static_cast<Eigen::Index>(k)];
      if (w != 0.0) grad += w * p.env->constraint_subgradient(i, t, xi, k);
    }
  }
  auto nbrs = g.neighbors(i);
  for (std::size_t slot = 0; slot < nbrs.size(); ++slot) {
    const std::size_t j = nbrs[slot];
    double weight = s.mu(i, slot);
    if (coupling == PrimalCoupling::kFullLagrangian) {
      weight += s.mu(j, g.reverse_slot(i, slot));
    }
    if (weight != 0.0) grad += (2.0 * weight) * (xi - s.x(j));
  }
  return -epsilon * grad;
}

Vec primal_field(const SystemState& s, const ProblemSpec& p, const Graph& g,
                 std::size_t i, double epsilon,
                 PrimalCoupling coupling = PrimalCoupling::kFullLagrangian);

struct DualRates {
  Vec lambda_rate;              // eps * f_i(t, x_i)
  std::vector<double> mu_rate;  // eps * (||x_i - x_j||^2 - gamma), per slot
};

template <class View>
DualRates dual_fields(const View& s, const ProblemSpec& p, const Graph& g,
                      std::size_t i, double epsilon) {
  DualRates out;
  const Vec& xi = s.x(i);
  out.lambda_rate = p.constraint_count(i) > 0
                        ? Vec(epsilon * p.env->constraints(i, s.time(), xi))
                        : Vec();
  auto nbrs = g.neighbors(i);
  out.mu_rate.reserve(nbrs.size());
  for (std::size_t j : nbrs) {
    out.mu_rate.push_back(epsilon * proximity_constraint(xi, s.x(j), p.gamma));
  }
  return out;
}

DualRates dual_fields(const SystemState& s, const ProblemSpec& p, const Graph& g,
                      std::size_t i, double epsilon);

// One synchronous projected Euler step. All fields are evaluated at the old
// state; x is projected onto the action set and multipliers onto the
// nonnegative orthant. Throws HorizonExceeded past T, NonFinite on NaN/inf.
SystemState step(const SystemState& s, const ProblemSpec& p, const Graph& g,
                 const EngineConfig& cfg);

struct RunOptions {
  MetricsOptions metrics;
  // Offline benchmark x*; enables running regret and the energy trace
  // relative to (x*, 0, 0).
  std::optional<Vec> benchmark;
};

// Integrates the dynamics over [0, T] and accumulates every metric.
TrajectoryLog run(const ProblemSpec& p, const Graph& g, const EngineConfig& cfg,
                  const RunOptions& options = {});

}  // namespace dosp
