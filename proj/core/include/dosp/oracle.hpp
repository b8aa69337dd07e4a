#pragma once

#include <cstddef>
#include <string>

#include "dosp/linalg.hpp"
#include "dosp/problem.hpp"

namespace dosp {

// Offline benchmark x* over the sampled horizon: minimize sum_k h f0(t_k, x)
// subject to f(t_k, x) <= 0 at every sample, x in X.
struct OracleResult {
  Vec xstar;
  double objective_integral = 0.0;
  double worst_violation = 0.0;  // max over samples, agents, components
  std::string method;            // "grid" or "subgradient"
  std::size_t resolution = 0;    // grid points per axis
  std::size_t iterations = 0;
  double penalty_weight = 0.0;   // subgradient only
  bool feasible = false;         // worst_violation <= feasibility_tol
  bool restored = false;         // subgradient result pulled toward the witness
};

constexpr double kOracleFeasibilityTol = 1e-6;

// Sampled objective sum_k h f0(t_k, x).
double sampled_objective(const ProblemSpec& p, const Vec& x);

// Exhaustive search over resolution^n points of a box (n <= 3). Ties go to the
// lexicographically smallest point. Throws NoFeasiblePoint when no grid point
// is feasible and InvalidArgument for a ball or n > 3.
OracleResult grid_oracle(const ProblemSpec& p, std::size_t resolution,
                         double feasibility_tol = kOracleFeasibilityTol);

// Steps c / sqrt(k) along normalized subgradients.
struct StepSchedule {
  double scale = 0.5;
};

// Projected subgradient on objective + w * sum of positive sampled violations.
// w starts at 1e3 max(L0, 1) and doubles whenever a tenth of the budget passes
// without a feasible iterate. Returns the best feasible point among the
// iterates and, when the scenario has a witness, the final, averaged and least
// violating iterates moved toward the witness until feasible. Without a
// witness and without a feasible iterate, the least violating one is returned.
OracleResult subgradient_oracle(const ProblemSpec& p, std::size_t iterations,
                                StepSchedule schedule = {},
                                double feasibility_tol = kOracleFeasibilityTol);

}  // namespace dosp
