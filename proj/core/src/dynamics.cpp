#include "dosp/dynamics.hpp"

#include <cmath>
#include <limits>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "dosp/errors.hpp"

namespace dosp {

double proximity_constraint(const Vec& xi, const Vec& xj, double gamma) {
  if (xi.size() != xj.size()) throw DimensionMismatch("proximity constraint");
  return (xi - xj).squaredNorm() - gamma;
}

double local_lagrangian(const SystemState& s, const ProblemSpec& p,
                        const Graph& g, std::size_t i) {
  return local_lagrangian(StateView(s), p, g, i);
}

double lagrangian(const SystemState& s, const ProblemSpec& p, const Graph& g) {
  double cost = 0.0;
  double constraint_terms = 0.0;
  double proximity_terms = 0.0;
  for (std::size_t i = 0; i < p.agent_count(); ++i) {
    cost += p.env->cost(i, s.t, s.x[i]);
    if (p.constraint_count(i) > 0) {
      constraint_terms += s.lambda[i].dot(p.env->constraints(i, s.t, s.x[i]));
    }
  }
  for (std::size_t i = 0; i < p.agent_count(); ++i) {
    auto nbrs = g.neighbors(i);
    for (std::size_t slot = 0; slot < nbrs.size(); ++slot) {
      const Vec d = s.x[i] - s.x[nbrs[slot]];
      proximity_terms += s.mu[i][slot] * (d.squaredNorm() - p.gamma);
    }
  }
  return cost + constraint_terms + proximity_terms;
}

Vec primal_field(const SystemState& s, const ProblemSpec& p, const Graph& g,
                 std::size_t i, double epsilon, PrimalCoupling coupling) {
  return primal_field(StateView(s), p, g, i, epsilon, coupling);
}

DualRates dual_fields(const SystemState& s, const ProblemSpec& p, const Graph& g,
                      std::size_t i, double epsilon) {
  return dual_fields(StateView(s), p, g, i, epsilon);
}

namespace {

// Per-agent update into `next`; reads only `cur`.
void advance_agent(const SystemState& cur, SystemState& next, const ProblemSpec& p,
                   const Graph& g, const EngineConfig& cfg, std::size_t i) {
  const StateView view(cur);
  const double h = cfg.step;
  Vec xi = cur.x[i] + h * primal_field(view, p, g, i, cfg.epsilon, cfg.coupling);
  p.action_set.project_in_place(xi);
  next.x[i] = std::move(xi);

  DualRates rates = dual_fields(view, p, g, i, cfg.epsilon);
  if (rates.lambda_rate.size() > 0) {
    next.lambda[i] = (cur.lambda[i] + h * rates.lambda_rate).cwiseMax(0.0);
  }
  for (std::size_t slot = 0; slot < rates.mu_rate.size(); ++slot) {
    next.mu[i][slot] = std::max(0.0, cur.mu[i][slot] + h * rates.mu_rate[slot]);
  }
}

SystemState advance(const SystemState& cur, const ProblemSpec& p, const Graph& g,
                    const EngineConfig& cfg, std::size_t step_index) {
  SystemState next = cur;
  const std::size_t n = p.agent_count();
  if (cfg.workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) advance_agent(cur, next, p, g, cfg, i);
  } else {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                        for (std::size_t i = r.begin(); i != r.end(); ++i) {
                          advance_agent(cur, next, p, g, cfg, i);
                        }
                      });
  }
  next.t = cur.t + cfg.step;
  if (!next.all_finite()) {
    throw NonFinite(step_index, "state became non-finite at step " +
                                    std::to_string(step_index));
  }
  return next;
}

void check_horizon(const SystemState& s, const EngineConfig& cfg) {
  if (s.t + cfg.step > cfg.horizon + 0.5 * cfg.step) {
    throw HorizonExceeded("step from t = " + std::to_string(s.t) +
                          " would pass the horizon " + std::to_string(cfg.horizon));
  }
}

}  // namespace

SystemState step(const SystemState& s, const ProblemSpec& p, const Graph& g,
                 const EngineConfig& cfg) {
  validate(cfg);
  check_shape(s, p, g);
  check_horizon(s, cfg);
  const auto index = static_cast<std::size_t>(std::llround(s.t / cfg.step));
  if (cfg.workers <= 1) return advance(s, p, g, cfg, index);
  tbb::task_arena arena(static_cast<int>(cfg.workers));
  return arena.execute([&] { return advance(s, p, g, cfg, index); });
}

namespace {

LogSample make_sample(const TrajectoryLog& log, std::size_t k, double h,
                      const SystemState& s, const RunningIntegrals& acc,
                      const std::optional<SystemState>& energy_ref) {
  LogSample out;
  out.step = k;
  out.t = static_cast<double>(k) * h;
  out.state = s;
  out.integrals = acc;
  out.energy = energy_ref ? energy(s, *energy_ref)
                          : std::numeric_limits<double>::quiet_NaN();
  out.max_multiplier = s.max_multiplier();
  (void)log;
  return out;
}

TrajectoryLog run_impl(const ProblemSpec& p, const Graph& g, const EngineConfig& cfg,
                       const RunOptions& options) {
  TrajectoryLog log(p, cfg, options.metrics, options.benchmark);
  SystemState state = cfg.initial_state ? *cfg.initial_state : initial_state(p, g);
  check_shape(state, p, g);
  state.t = 0.0;
  for (const auto& x : state.x) {
    if (!p.action_set.contains(x, 1e-12)) {
      throw InvalidArgument("initial action lies outside the action set");
    }
  }

  std::optional<SystemState> energy_ref;
  if (options.benchmark) {
    if (options.benchmark->size() != p.action_dim()) {
      throw DimensionMismatch("benchmark dimension differs from action_dim");
    }
    energy_ref = initial_state(p, g);
    for (auto& x : energy_ref->x) x = *options.benchmark;
  }

  const std::size_t steps = cfg.step_count();
  const double h = cfg.step;
  RunningIntegrals acc = log.zero_integrals();
  log.samples().push_back(make_sample(log, 0, h, state, acc, energy_ref));
  log.note_multiplier(state.max_multiplier());

  for (std::size_t k = 0; k < steps; ++k) {
    state.t = static_cast<double>(k) * h;
    accumulate(acc, state, p, log, h);
    state = advance(state, p, g, cfg, k);
    state.t = static_cast<double>(k + 1) * h;
    log.note_multiplier(state.max_multiplier());
    if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) {
      log.samples().push_back(make_sample(log, k + 1, h, state, acc, energy_ref));
    }
  }
  return log;
}

}  // namespace

TrajectoryLog run(const ProblemSpec& p, const Graph& g, const EngineConfig& cfg,
                  const RunOptions& options) {
  validate(p);
  validate(cfg);
  if (g.node_count() != p.agent_count()) {
    throw DimensionMismatch("graph and problem disagree on the agent count");
  }
  if (cfg.horizon > p.horizon * (1.0 + 1e-12) + 1e-12) {
    throw HorizonExceeded("engine horizon exceeds the problem horizon");
  }
  tbb::task_arena arena(static_cast<int>(cfg.workers));
  return arena.execute([&] { return run_impl(p, g, cfg, options); });
}

}  // namespace dosp
