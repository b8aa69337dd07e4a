#include "dosp/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <tbb/blocked_range.h>
#include <tbb/parallel_reduce.h>

#include "dosp/errors.hpp"

namespace dosp {

double sampled_objective(const ProblemSpec& p, const Vec& x) {
  double total = 0.0;
  for (double t : sample_times(p)) total += p.sample_step * eval_sum_cost(p, t, x);
  return total;
}

namespace {

// -inf when the problem has no constraints.
double violation_of(const ProblemSpec& p, const Vec& x) { return worst_violation(p, x); }

// Stops at the first sampled violation above tol.
bool sampled_feasible(const ProblemSpec& p, const Vec& x, double tol) {
  for (double t : sample_times(p)) {
    for (std::size_t j = 0; j < p.agent_count(); ++j) {
      if (p.constraint_count(j) == 0) continue;
      if (eval_constraints(p, j, t, x).maxCoeff() > tol) return false;
    }
  }
  return true;
}

struct Candidate {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  double objective = std::numeric_limits<double>::infinity();
};

Candidate better(const Candidate& a, const Candidate& b) {
  Candidate out;
  const bool take_b = b.objective < a.objective ||
                      (b.objective == a.objective && b.index < a.index);
  out.index = take_b ? b.index : a.index;
  out.objective = take_b ? b.objective : a.objective;
  return out;
}

}  // namespace

OracleResult grid_oracle(const ProblemSpec& p, std::size_t resolution,
                         double feasibility_tol) {
  const ActionSet& X = p.action_set;
  const Eigen::Index n = p.action_dim();
  if (X.kind() != ActionSet::Kind::kBox) {
    throw InvalidArgument("grid_oracle needs a box action set");
  }
  if (n < 1 || n > 3) throw InvalidArgument("grid_oracle supports dimension <= 3");
  if (resolution < 2) throw InvalidArgument("grid_oracle resolution must be >= 2");

  std::size_t total = 1;
  for (Eigen::Index c = 0; c < n; ++c) total *= resolution;
  const Vec lo = X.lower();
  const Vec hi = X.upper();

  // Index to point; the first coordinate varies slowest so index order is
  // lexicographic order.
  auto point = [&](std::size_t idx) {
    Vec x(n);
    for (Eigen::Index c = n - 1; c >= 0; --c) {
      const std::size_t k = idx % resolution;
      idx /= resolution;
      x[c] = lo[c] + (hi[c] - lo[c]) * static_cast<double>(k) /
                         static_cast<double>(resolution - 1);
    }
    return x;
  };

  const Candidate best = tbb::parallel_reduce(
      tbb::blocked_range<std::size_t>(0, total), Candidate{},
      [&](const tbb::blocked_range<std::size_t>& r, Candidate acc) {
        for (std::size_t idx = r.begin(); idx != r.end(); ++idx) {
          const Vec x = point(idx);
          if (!sampled_feasible(p, x, feasibility_tol)) continue;
          const double obj = sampled_objective(p, x);
          if (obj < acc.objective) {
            acc.objective = obj;
            acc.index = idx;
          }
        }
        return acc;
      },
      better);

  if (best.index == std::numeric_limits<std::size_t>::max()) {
    // Diagnostic pass for the error message.
    double least = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < total; ++idx) least = std::min(least, violation_of(p, point(idx)));
    throw NoFeasiblePoint(least,
                          "no grid point is feasible; smallest worst violation " +
                              std::to_string(least));
  }
  OracleResult out;
  out.xstar = point(best.index);
  out.objective_integral = best.objective;
  out.worst_violation = violation_of(p, out.xstar);
  out.method = "grid";
  out.resolution = resolution;
  out.feasible = true;
  return out;
}

OracleResult subgradient_oracle(const ProblemSpec& p, std::size_t iterations,
                                StepSchedule schedule, double feasibility_tol) {
  if (!(schedule.scale > 0.0)) throw InvalidArgument("step scale must be > 0");
  const Eigen::Index n = p.action_dim();
  const auto times = sample_times(p);
  const double h = p.sample_step;
  double weight = 1e3 * std::max(p.constants.lipschitz_cost, 1.0);

  Vec x = p.action_set.project(Vec::Zero(n));
  Vec best_feasible, least_violating;
  double best_obj = std::numeric_limits<double>::infinity();
  double least_v = std::numeric_limits<double>::infinity();
  double least_v_obj = 0.0;

  auto consider = [&](const Vec& y) {
    const double v = violation_of(p, y);
    const double obj = sampled_objective(p, y);
    if (v <= feasibility_tol) {
      if (obj < best_obj) {
        best_obj = obj;
        best_feasible = y;
      }
    } else if (v < least_v || (v == least_v && obj < least_v_obj)) {
      least_v = v;
      least_v_obj = obj;
      least_violating = y;
    }
    return v <= feasibility_tol;
  };

  consider(x);
  Vec average = Vec::Zero(n);
  double weight_sum = 0.0;
  const std::size_t block = std::max<std::size_t>(1, iterations / 10);
  std::size_t since_feasible = 0;
  for (std::size_t k = 1; k <= iterations; ++k) {
    Vec g = Vec::Zero(n);
    for (double t : times) {
      for (std::size_t j = 0; j < p.agent_count(); ++j) {
        g += h * cost_subgradient(p, j, t, x);
        const std::size_t m = p.constraint_count(j);
        if (m == 0) continue;
        const Vec f = eval_constraints(p, j, t, x);
        for (std::size_t c = 0; c < m; ++c) {
          if (f[static_cast<Eigen::Index>(c)] > 0.0) {
            g += (weight * h) * constraint_subgradient(p, j, t, x, c);
          }
        }
      }
    }
    const double gn = g.norm();
    if (gn == 0.0) break;  // stationary for the penalized objective
    const double alpha = schedule.scale / std::sqrt(static_cast<double>(k));
    x = p.action_set.project(x - (alpha / gn) * g);
    average += alpha * x;
    weight_sum += alpha;
    if (consider(x)) {
      since_feasible = 0;
    } else if (++since_feasible >= block && best_feasible.size() == 0) {
      weight *= 2.0;
      since_feasible = 0;
    }
  }

  // Feasibility restoration: move toward the witness along the segment until
  // the sampled constraints hold (an interval ending at the witness, by
  // convexity). Applied to the final and averaged iterates, which sit within
  // a step of the boundary when a constraint is active, and to the least
  // violating iterate when nothing was feasible.
  bool restored = false;
  const bool can_restore =
      p.feasible_witness && sampled_feasible(p, *p.feasible_witness, feasibility_tol);
  auto restore = [&](const Vec& y) {
    const Vec& w = *p.feasible_witness;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (sampled_feasible(p, (1.0 - mid) * y + mid * w, feasibility_tol)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return Vec((1.0 - hi) * y + hi * w);
  };
  if (can_restore) {
    std::vector<Vec> candidates{x};
    if (weight_sum > 0.0) candidates.push_back(average / weight_sum);
    if (least_violating.size() > 0) candidates.push_back(least_violating);
    for (const Vec& c : candidates) {
      const Vec y = sampled_feasible(p, c, feasibility_tol) ? c : restore(c);
      const double obj = sampled_objective(p, y);
      if (obj < best_obj) {
        best_obj = obj;
        best_feasible = y;
        restored = y != c;
      }
    }
  }

  OracleResult out;
  out.method = "subgradient";
  out.restored = restored;
  out.iterations = iterations;
  out.penalty_weight = weight;
  out.xstar = best_feasible.size() > 0 ? best_feasible : least_violating;
  out.objective_integral = sampled_objective(p, out.xstar);
  out.worst_violation = violation_of(p, out.xstar);
  out.feasible = out.worst_violation <= feasibility_tol;
  return out;
}

}  // namespace dosp
