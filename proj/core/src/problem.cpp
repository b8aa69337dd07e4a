#include "dosp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dosp/errors.hpp"

namespace dosp {

LambdaEnvironment::LambdaEnvironment(std::size_t agents, Eigen::Index dim,
                                     std::vector<std::size_t> constraint_counts,
                                     CostFn cost, VecFn cost_grad,
                                     VecFn constraints, RowFn constraint_grad)
    : agents_(agents),
      dim_(dim),
      counts_(std::move(constraint_counts)),
      cost_(std::move(cost)),
      cost_grad_(std::move(cost_grad)),
      constraints_(std::move(constraints)),
      constraint_grad_(std::move(constraint_grad)) {
  if (counts_.size() != agents_) {
    throw DimensionMismatch("one constraint count per agent is required");
  }
}

std::size_t ProblemSpec::total_constraints() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < agent_count(); ++i) m += constraint_count(i);
  return m;
}

std::size_t ProblemSpec::sample_count() const {
  if (sample_step <= 0.0) return 0;
  return static_cast<std::size_t>(std::llround(horizon / sample_step));
}

void validate(const ProblemSpec& p) {
  if (!p.env) throw InvalidArgument("problem has no environment");
  if (p.agent_count() == 0) throw InvalidArgument("problem has no agents");
  if (p.action_dim() != p.action_set.dim()) {
    throw DimensionMismatch("action set dimension differs from action_dim");
  }
  if (!(p.gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  const auto& c = p.constants;
  if (!(c.lipschitz_cost > 0.0) || !(c.lipschitz_constraint > 0.0) ||
      !(c.cost_floor_gap > 0.0)) {
    throw InvalidArgument("L0, Lf and K must be positive");
  }
  if (!(p.horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  if (!(p.sample_step > 0.0)) throw InvalidArgument("sample_step must be > 0");
  if (p.feasible_witness && !p.action_set.contains(*p.feasible_witness, 1e-12)) {
    throw InvalidArgument("feasible witness lies outside the action set");
  }
}

std::vector<double> sample_times(const ProblemSpec& p) {
  std::vector<double> ts(p.sample_count());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    ts[k] = static_cast<double>(k) * p.sample_step;
  }
  return ts;
}

namespace {

void check_args(const ProblemSpec& p, std::size_t i, double t, const Vec& x) {
  if (i >= p.agent_count()) {
    throw OutOfRange("agent " + std::to_string(i) + " out of range");
  }
  double slack = 1e-9 * std::max(1.0, p.horizon);
  if (!(t >= -slack && t <= p.horizon + slack)) {
    throw HorizonExceeded("time " + std::to_string(t) + " outside [0, " +
                          std::to_string(p.horizon) + "]");
  }
  if (x.size() != p.action_dim()) {
    throw DimensionMismatch("action has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(p.action_dim()));
  }
}

}  // namespace

double eval_cost(const ProblemSpec& p, std::size_t i, double t, const Vec& x) {
  check_args(p, i, t, x);
  return p.env->cost(i, t, x);
}

Vec eval_constraints(const ProblemSpec& p, std::size_t i, double t,
                     const Vec& x) {
  check_args(p, i, t, x);
  return p.env->constraints(i, t, x);
}

Vec cost_subgradient(const ProblemSpec& p, std::size_t i, double t,
                     const Vec& x) {
  check_args(p, i, t, x);
  return p.env->cost_subgradient(i, t, x);
}

Vec constraint_subgradient(const ProblemSpec& p, std::size_t i, double t,
                           const Vec& x, std::size_t k) {
  check_args(p, i, t, x);
  if (k >= p.constraint_count(i)) {
    throw OutOfRange("constraint index " + std::to_string(k) + " out of range");
  }
  return p.env->constraint_subgradient(i, t, x, k);
}

double eval_sum_cost(const ProblemSpec& p, double t, const Vec& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.agent_count(); ++j) s += eval_cost(p, j, t, x);
  return s;
}

double worst_violation(const ProblemSpec& p, const Vec& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : sample_times(p)) {
    for (std::size_t j = 0; j < p.agent_count(); ++j) {
      if (p.constraint_count(j) == 0) continue;
      worst = std::max(worst, eval_constraints(p, j, t, x).maxCoeff());
    }
  }
  return worst;
}

WitnessCheck check_witness(const ProblemSpec& p) {
  WitnessCheck out;
  if (!p.feasible_witness) return out;
  out.present = true;
  out.worst = worst_violation(p, *p.feasible_witness);
  out.strictly_feasible = out.worst < 0.0;
  return out;
}

double softplus(double a) {
  return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
}

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  double e = std::exp(a);
  return e / (1.0 + e);
}

double logistic_loss(double y, const Vec& z, const Vec& x) {
  if (z.size() != x.size()) throw DimensionMismatch("feature/classifier size");
  return softplus(-y * x.dot(z));
}

Vec logistic_loss_gradient(double y, const Vec& z, const Vec& x) {
  if (z.size() != x.size()) throw DimensionMismatch("feature/classifier size");
  return (-y * sigmoid(-y * x.dot(z))) * z;
}

Vec l1_subgradient(const Vec& x) {
  Vec g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    g[k] = x[k] > 0.0 ? 1.0 : (x[k] < 0.0 ? -1.0 : 0.0);
  }
  return g;
}

}  // namespace dosp
