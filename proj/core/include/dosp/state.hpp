#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dosp/graph.hpp"
#include "dosp/linalg.hpp"
#include "dosp/problem.hpp"

namespace dosp {

// Primal actions and multipliers of every agent at one instant.
// mu[i][s] is the multiplier of the proximity constraint between i and its
// s-th neighbor; it is owned by i and distinct from the one owned by the
// neighbor.
struct SystemState {
  double t = 0.0;
  std::vector<Vec> x;
  std::vector<Vec> lambda;
  std::vector<std::vector<double>> mu;

  std::size_t agent_count() const { return x.size(); }
  double max_multiplier() const;
  bool all_finite() const;
};

// x(0) = projection of the origin onto the action set, zero multipliers.
SystemState initial_state(const ProblemSpec& p, const Graph& g);

// Checks shapes against the problem and graph. Throws DimensionMismatch.
void check_shape(const SystemState& s, const ProblemSpec& p, const Graph& g);

// Stacks x, lambda and mu into one vector (agent-major).
Vec flatten_primal(const SystemState& s);
Vec flatten_lambda(const SystemState& s);
Vec flatten_mu(const SystemState& s);

// Read-only accessors used by the field computations. Any type with this
// interface can stand in for the state (see the decentralization tests).
class StateView {
 public:
  explicit StateView(const SystemState& s) : s_(&s) {}
  double time() const { return s_->t; }
  const Vec& x(std::size_t i) const { return s_->x[i]; }
  const Vec& lambda(std::size_t i) const { return s_->lambda[i]; }
  double mu(std::size_t i, std::size_t slot) const { return s_->mu[i][slot]; }

 private:
  const SystemState* s_;
};

enum class PrimalCoupling {
  // Partial of the full Lagrangian: 2 (mu_ij + mu_ji) (x_i - x_j).
  kFullLagrangian,
  // Partial of agent i's own local Lagrangian: 2 mu_ij (x_i - x_j).
  kLocalOnly,
};

struct EngineConfig {
  double epsilon = 1.0;  // controller gain
  double step = 0.02;    // Euler step h
  double horizon = 1.0;  // T
  std::size_t record_every = 1;
  std::optional<SystemState> initial_state;
  PrimalCoupling coupling = PrimalCoupling::kFullLagrangian;
  std::size_t workers = 1;

  std::size_t step_count() const;  // round(T / h)
};

// Throws InvalidArgument naming the offending field.
void validate(const EngineConfig& cfg);

}  // namespace dosp
