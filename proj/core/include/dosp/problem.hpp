#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dosp/action_set.hpp"
#include "dosp/linalg.hpp"

namespace dosp {

// Time-varying local costs f0i(t, x) and constraints fi(t, x) of every agent.
// Implementations must be deterministic in (agent, t, x) and safe to call
// concurrently for different agents.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t agent_count() const = 0;
  virtual Eigen::Index action_dim() const = 0;
  virtual std::size_t constraint_count(std::size_t agent) const = 0;

  virtual double cost(std::size_t agent, double t, const Vec& x) const = 0;
  virtual Vec cost_subgradient(std::size_t agent, double t,
                               const Vec& x) const = 0;
  // Vector of length constraint_count(agent).
  virtual Vec constraints(std::size_t agent, double t, const Vec& x) const = 0;
  virtual Vec constraint_subgradient(std::size_t agent, double t, const Vec& x,
                                     std::size_t k) const = 0;
};

// Environment assembled from callables; convenient for small analytic
// problems and tests.
class LambdaEnvironment final : public Environment {
 public:
  using CostFn = std::function<double(std::size_t, double, const Vec&)>;
  using VecFn = std::function<Vec(std::size_t, double, const Vec&)>;
  using RowFn = std::function<Vec(std::size_t, double, const Vec&, std::size_t)>;

  LambdaEnvironment(std::size_t agents, Eigen::Index dim,
                    std::vector<std::size_t> constraint_counts, CostFn cost,
                    VecFn cost_grad, VecFn constraints, RowFn constraint_grad);

  std::size_t agent_count() const override { return agents_; }
  Eigen::Index action_dim() const override { return dim_; }
  std::size_t constraint_count(std::size_t agent) const override {
    return counts_.at(agent);
  }
  double cost(std::size_t i, double t, const Vec& x) const override {
    return cost_(i, t, x);
  }
  Vec cost_subgradient(std::size_t i, double t, const Vec& x) const override {
    return cost_grad_(i, t, x);
  }
  Vec constraints(std::size_t i, double t, const Vec& x) const override {
    return counts_.at(i) == 0 ? Vec() : constraints_(i, t, x);
  }
  Vec constraint_subgradient(std::size_t i, double t, const Vec& x,
                             std::size_t k) const override {
    return constraint_grad_(i, t, x, k);
  }

 private:
  std::size_t agents_;
  Eigen::Index dim_;
  std::vector<std::size_t> counts_;
  CostFn cost_;
  VecFn cost_grad_;
  VecFn constraints_;
  RowFn constraint_grad_;
};

// Declared assumption constants. They only feed bound reporting.
struct AssumptionConstants {
  double lipschitz_cost = 1.0;        // L0
  double lipschitz_constraint = 1.0;  // Lf
  double cost_floor_gap = 1.0;        // K
};

struct ProblemSpec {
  std::string name;
  std::shared_ptr<const Environment> env;
  ActionSet action_set = ActionSet::symmetric_box(1, 1.0);
  double gamma = 0.0;  // proximity slack
  AssumptionConstants constants;
  std::optional<Vec> feasible_witness;
  double horizon = 0.0;      // T
  double sample_step = 0.0;  // h; resolution of the sampled horizon
  std::optional<double> regularizer_weight;  // alpha, when the scenario has one

  std::size_t agent_count() const { return env->agent_count(); }
  Eigen::Index action_dim() const { return env->action_dim(); }
  std::size_t constraint_count(std::size_t i) const {
    return env->constraint_count(i);
  }
  std::size_t total_constraints() const;
  std::size_t sample_count() const;  // round(T / h)
};

// Checks the structural invariants (dimensions, gamma >= 0, positive
// constants, witness inside the action set). Throws InvalidArgument.
void validate(const ProblemSpec& p);

// Sampled horizon {k h : k = 0 .. sample_count()-1}; the left endpoints of the
// rectangles used by every time integral in the library.
std::vector<double> sample_times(const ProblemSpec& p);

// Evaluators with precondition checks (agent and time range, dimensions).
double eval_cost(const ProblemSpec& p, std::size_t i, double t, const Vec& x);
Vec eval_constraints(const ProblemSpec& p, std::size_t i, double t, const Vec& x);
Vec cost_subgradient(const ProblemSpec& p, std::size_t i, double t, const Vec& x);
Vec constraint_subgradient(const ProblemSpec& p, std::size_t i, double t,
                           const Vec& x, std::size_t k);

// Sum cost f0(t, x) = sum_j f0j(t, x) of a single shared action x.
double eval_sum_cost(const ProblemSpec& p, double t, const Vec& x);

// Largest constraint component over agents and sampled times at a shared
// action x. Negative means strictly feasible on the sampled horizon.
double worst_violation(const ProblemSpec& p, const Vec& x);

struct WitnessCheck {
  bool present = false;
  bool strictly_feasible = false;
  double worst = 0.0;
};
WitnessCheck check_witness(const ProblemSpec& p);

// log(1 + exp(-y <x, z>)) in softplus form.
double logistic_loss(double y, const Vec& z, const Vec& x);
// Gradient of logistic_loss with respect to x.
Vec logistic_loss_gradient(double y, const Vec& z, const Vec& x);
double softplus(double a);
double sigmoid(double a);

// Subgradient of ||x||_1 with 0 at zero coordinates.
Vec l1_subgradient(const Vec& x);

}  // namespace dosp
