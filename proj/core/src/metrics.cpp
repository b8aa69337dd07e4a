#include "dosp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "dosp/dynamics.hpp"
#include "dosp/errors.hpp"

namespace dosp {

TrajectoryLog::TrajectoryLog(const ProblemSpec& p, const EngineConfig& cfg,
                             MetricsOptions options, std::optional<Vec> benchmark)
    : step_(cfg.step),
      horizon_(cfg.horizon),
      epsilon_(cfg.epsilon),
      steps_(cfg.step_count()),
      record_every_(cfg.record_every),
      options_(std::move(options)),
      benchmark_(std::move(benchmark)) {
  for (double d : options_.saturation_deltas) {
    if (!(d > 0.0)) throw InvalidArgument("saturation delta must be > 0");
  }
  for (std::size_t j = 0; j < p.agent_count(); ++j) {
    counts_.push_back(p.constraint_count(j));
    constraint_offsets_.push_back(total_constraints_);
    total_constraints_ += counts_.back();
  }
}

std::size_t TrajectoryLog::pair_count() const {
  const std::size_t n = agent_count();
  return n * (n - 1) / 2;
}

std::size_t TrajectoryLog::pair_index(std::size_t i, std::size_t j) const {
  const std::size_t n = agent_count();
  if (i == j || i >= n || j >= n) throw OutOfRange("invalid agent pair");
  if (i > j) std::swap(i, j);
  // Row-major upper triangle.
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

const LogSample& TrajectoryLog::final_sample() const {
  if (samples_.empty()) throw InvalidArgument("empty trajectory log");
  return samples_.back();
}

RunningIntegrals TrajectoryLog::zero_integrals() const {
  RunningIntegrals r;
  const std::size_t n = agent_count();
  r.fit.assign(n * total_constraints_, 0.0);
  r.saturated.assign(options_.saturation_deltas.size(),
                     std::vector<double>(n * total_constraints_, 0.0));
  r.sum_cost.assign(n, 0.0);
  r.disagreement.assign(pair_count(), 0.0);
  return r;
}

void accumulate(RunningIntegrals& acc, const SystemState& s, const ProblemSpec& p,
                const TrajectoryLog& log, double h) {
  const std::size_t n = p.agent_count();
  const std::size_t M = log.total_constraints();
  const auto& deltas = log.saturation_deltas();
  const double t = s.t;

  auto per_agent = [&](std::size_t i) {
    const Vec& xi = s.x[i];
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cost += p.env->cost(j, t, xi);
      const std::size_t m = log.constraint_count(j);
      if (m == 0) continue;
      const Vec f = p.env->constraints(j, t, xi);
      const std::size_t base = i * M + log.constraint_offset(j);
      for (std::size_t k = 0; k < m; ++k) {
        const double v = f[static_cast<Eigen::Index>(k)];
        acc.fit[base + k] += h * v;
        for (std::size_t d = 0; d < deltas.size(); ++d) {
          acc.saturated[d][base + k] += h * std::max(v, -deltas[d]);
        }
      }
    }
    acc.sum_cost[i] += h * cost;
  };
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t i = r.begin(); i != r.end(); ++i) per_agent(i);
                    });

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      acc.disagreement[log.pair_index(i, j)] += h * (s.x[i] - s.x[j]).norm();
    }
  }
  if (log.benchmark()) acc.benchmark_cost += h * eval_sum_cost(p, t, *log.benchmark());
}

double energy(const SystemState& s, const SystemState& ref) {
  if (s.x.size() != ref.x.size() || s.lambda.size() != ref.lambda.size() ||
      s.mu.size() != ref.mu.size()) {
    throw DimensionMismatch("energy: state and reference shapes differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.x[i].size() != ref.x[i].size() ||
        s.lambda[i].size() != ref.lambda[i].size() ||
        s.mu[i].size() != ref.mu[i].size()) {
      throw DimensionMismatch("energy: state and reference shapes differ");
    }
    total += (s.x[i] - ref.x[i]).squaredNorm();
    total += (s.lambda[i] - ref.lambda[i]).squaredNorm();
    for (std::size_t k = 0; k < s.mu[i].size(); ++k) {
      const double d = s.mu[i][k] - ref.mu[i][k];
      total += d * d;
    }
  }
  return 0.5 * total;
}

double benchmark_cost_integral(const ProblemSpec& p, const Vec& xstar,
                               std::size_t steps) {
  double total = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    total += p.sample_step * eval_sum_cost(p, static_cast<double>(k) * p.sample_step, xstar);
  }
  return total;
}

double regret(const TrajectoryLog& log, const ProblemSpec& p, std::size_t i,
              const Vec& xstar) {
  const auto& last = log.final_sample();
  if (i >= log.agent_count()) throw OutOfRange("agent out of range");
  if (xstar.size() != p.action_dim()) throw DimensionMismatch("x* dimension");
  double ref = 0.0;
  for (std::size_t k = 0; k < last.step; ++k) {
    ref += log.step() * eval_sum_cost(p, static_cast<double>(k) * log.step(), xstar);
  }
  return last.integrals.sum_cost[i] - ref;
}

Vec fit_at(const TrajectoryLog& log, const LogSample& s, std::size_t i, std::size_t j) {
  if (i >= log.agent_count() || j >= log.agent_count()) throw OutOfRange("agent");
  const std::size_t m = log.constraint_count(j);
  const std::size_t base = i * log.total_constraints() + log.constraint_offset(j);
  Vec out(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    out[static_cast<Eigen::Index>(k)] = s.integrals.fit[base + k];
  }
  return out;
}

Vec fit(const TrajectoryLog& log, std::size_t i, std::size_t j) {
  return fit_at(log, log.final_sample(), i, j);
}

Vec fit_relative(const TrajectoryLog& log, const ProblemSpec& p, std::size_t i,
                 std::size_t j, const Vec& xstar) {
  Vec out = fit(log, i, j);
  if (out.size() == 0) return out;
  const auto& last = log.final_sample();
  for (std::size_t k = 0; k < last.step; ++k) {
    out -= log.step() * eval_constraints(p, j, static_cast<double>(k) * log.step(), xstar);
  }
  return out;
}

Vec saturated_fit_at(const TrajectoryLog& log, const LogSample& s, std::size_t i,
                     std::size_t j, std::size_t delta_index) {
  if (i >= log.agent_count() || j >= log.agent_count()) throw OutOfRange("agent");
  const std::size_t m = log.constraint_count(j);
  const std::size_t base = i * log.total_constraints() + log.constraint_offset(j);
  const auto& src = s.integrals.saturated.at(delta_index);
  Vec out(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) out[static_cast<Eigen::Index>(k)] = src[base + k];
  return out;
}

Vec saturated_fit(const TrajectoryLog& log, const ProblemSpec& p, std::size_t i,
                  std::size_t j, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("saturated fit requires delta > 0");
  const auto& deltas = log.saturation_deltas();
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    if (deltas[d] == delta) return saturated_fit_at(log, log.final_sample(), i, j, d);
  }
  if (!log.records_every_step()) {
    throw InvalidArgument("delta was not accumulated during the run and the log "
                          "does not hold every step");
  }
  if (i >= log.agent_count() || j >= log.agent_count()) throw OutOfRange("agent");
  Vec out = Vec::Zero(static_cast<Eigen::Index>(log.constraint_count(j)));
  const auto& samples = log.samples();
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const auto& s = samples[k];
    out += log.step() *
           eval_constraints(p, j, s.t, s.state.x[i]).cwiseMax(-delta);
  }
  return out;
}

double disagreement_at(const TrajectoryLog& log, const LogSample& s, std::size_t i,
                       std::size_t j) {
  if (i == j) return 0.0;
  return s.integrals.disagreement[log.pair_index(i, j)];
}

double disagreement(const TrajectoryLog& log, std::size_t i, std::size_t j) {
  return disagreement_at(log, log.final_sample(), i, j);
}

SystemState resolved_initial_state(const ProblemSpec& p, const Graph& g,
                                   const EngineConfig& cfg) {
  return cfg.initial_state ? *cfg.initial_state : initial_state(p, g);
}

double initial_gap_squared(const SystemState& x0, const Vec& xstar) {
  double s = 0.0;
  for (const auto& x : x0.x) s += (xstar - x).squaredNorm();
  return s;
}

namespace {

void require_zero_multipliers(const SystemState& s) {
  if (s.max_multiplier() != 0.0) {
    throw BoundHypothesisViolated(
        "the bound assumes lambda(0) = 0 and mu(0) = 0");
  }
}

}  // namespace

double disagreement_bound_value(double diameter, double K, double gamma,
                                double epsilon, double gap_sq, double T) {
  return diameter * std::sqrt((K + gamma) * T + (1.0 + gap_sq) / (2.0 * epsilon));
}

double regret_bound_value(std::size_t agents, double L0, double diameter, double K,
                          double gamma, double epsilon, double gap_sq, double T) {
  return (1.0 + gap_sq) / epsilon +
         static_cast<double>(agents - 1) * L0 * diameter *
             std::sqrt((K + gamma) * T + (1.0 + gap_sq) / (2.0 * epsilon));
}

double own_fit_bound_value(double K, double epsilon, double gap_sq, double T) {
  if (!(epsilon > 0.5)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt((gap_sq + 2.0 * epsilon * K * T) / (2.0 * epsilon - 1.0));
}

double disagreement_bound(const ProblemSpec& p, const Graph& g,
                          const EngineConfig& cfg, const Vec& xstar, double T) {
  const SystemState x0 = resolved_initial_state(p, g, cfg);
  require_zero_multipliers(x0);
  return disagreement_bound_value(static_cast<double>(g.diameter()),
                                  p.constants.cost_floor_gap, p.gamma, cfg.epsilon,
                                  initial_gap_squared(x0, xstar), T);
}

double regret_bound(const ProblemSpec& p, const Graph& g, const EngineConfig& cfg,
                    const Vec& xstar, double T) {
  const SystemState x0 = resolved_initial_state(p, g, cfg);
  require_zero_multipliers(x0);
  return regret_bound_value(p.agent_count(), p.constants.lipschitz_cost,
                            static_cast<double>(g.diameter()),
                            p.constants.cost_floor_gap, p.gamma, cfg.epsilon,
                            initial_gap_squared(x0, xstar), T);
}

double lemma1_gap(const TrajectoryLog& log, const ProblemSpec& p, const Graph& g,
                  const EngineConfig& cfg, const SystemState& reference) {
  if (!log.records_every_step()) {
    throw InvalidArgument("lemma1_gap needs a log that recorded every step");
  }
  check_shape(reference, p, g);
  for (std::size_t i = 0; i < reference.agent_count(); ++i) {
    if (!p.action_set.contains(reference.x[i], 1e-12)) {
      throw InvalidArgument("reference action outside the action set");
    }
    if (reference.lambda[i].size() > 0 && reference.lambda[i].minCoeff() < 0.0) {
      throw InvalidArgument("reference lambda must be >= 0");
    }
    for (double v : reference.mu[i]) {
      if (v < 0.0) throw InvalidArgument("reference mu must be >= 0");
    }
  }
  const auto& samples = log.samples();
  double integral = 0.0;
  SystemState probe = reference;
  SystemState mixed = reference;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const SystemState& s = samples[k].state;
    probe.t = s.t;
    probe.x = s.x;  // L(t, x(t), lambda~, mu~)
    mixed.t = s.t;
    mixed.lambda = s.lambda;  // L(t, x~, lambda(t), mu(t))
    mixed.mu = s.mu;
    integral += log.step() * (lagrangian(probe, p, g) - lagrangian(mixed, p, g));
  }
  return integral - energy(samples.front().state, reference) / cfg.epsilon;
}

Vec positive_part(const Vec& v) { return v.cwiseMax(0.0); }

MetricsReport make_report(const TrajectoryLog& log, const ProblemSpec& p,
                          const Graph& g, const EngineConfig& cfg, const Vec& xstar) {
  MetricsReport r;
  const std::size_t n = log.agent_count();
  const SystemState x0 = resolved_initial_state(p, g, cfg);
  const double gap_sq = initial_gap_squared(x0, xstar);
  const double T = log.final_sample().t;
  const bool zero_start = x0.max_multiplier() == 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double ref_cost = benchmark_cost_integral(p, xstar, log.final_sample().step);

  for (std::size_t i = 0; i < n; ++i) {
    AgentReport a;
    a.regret = log.final_sample().integrals.sum_cost[i] - ref_cost;
    a.regret_bound = zero_start ? regret_bound(p, g, cfg, xstar, T) : nan;
    a.own_fit = fit(log, i, i);
    if (!log.saturation_deltas().empty()) {
      a.own_saturated_fit = saturated_fit_at(log, log.final_sample(), i, i, 0);
    }
    a.own_fit_bound = own_fit_bound_value(p.constants.cost_floor_gap, cfg.epsilon,
                                          gap_sq, T);
    r.agents.push_back(std::move(a));
  }
  r.pair_disagreement = log.final_sample().integrals.disagreement;
  r.disagreement_bound = zero_start ? disagreement_bound(p, g, cfg, xstar, T) : nan;

  for (const auto& s : log.samples()) {
    r.energy_trace.push_back(s.energy);
    if (s.t <= 0.0) continue;
    const double root = std::sqrt(s.t);
    r.checkpoint_times.push_back(s.t);
    double dmax = 0.0;
    for (double d : s.integrals.disagreement) dmax = std::max(dmax, d);
    r.max_disagreement_ratio.push_back(dmax / root);
    double fmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      fmax = std::max(fmax, positive_part(fit_at(log, s, i, i)).norm());
    }
    r.max_fit_ratio.push_back(fmax / root);
    if (log.benchmark()) {
      double rmax = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        rmax = std::max(rmax, s.integrals.sum_cost[i] - s.integrals.benchmark_cost);
      }
      r.max_regret_ratio.push_back(rmax / root);
    }
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_metrics_csv(const TrajectoryLog& log, std::ostream& os,
                       const std::vector<ExtraColumn>& extra) {
  const std::size_t n = log.agent_count();
  const bool has_sat = !log.saturation_deltas().empty();
  std::string header = "t";
  for (std::size_t i = 0; i < n; ++i) header += ",xnorm_" + std::to_string(i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      header += ",gap_" + std::to_string(i) + "_" + std::to_string(j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      header += ",dis_" + std::to_string(i) + "_" + std::to_string(j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < log.constraint_count(i); ++k)
      header += ",fit_" + std::to_string(i) + "_" + std::to_string(k);
  if (has_sat) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < log.constraint_count(i); ++k)
        header += ",satfit_" + std::to_string(i) + "_" + std::to_string(k);
  }
  for (std::size_t i = 0; i < n; ++i) header += ",regret_" + std::to_string(i);
  header += ",energy,max_multiplier";
  for (const auto& col : extra) header += "," + col.name;
  os << header << '\n';

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : log.samples()) {
    std::string row = format_double(s.t);
    for (std::size_t i = 0; i < n; ++i) row += "," + format_double(s.state.x[i].norm());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        row += "," + format_double((s.state.x[i] - s.state.x[j]).norm());
    for (double d : s.integrals.disagreement) row += "," + format_double(d);
    for (std::size_t i = 0; i < n; ++i) {
      Vec f = fit_at(log, s, i, i);
      for (Eigen::Index k = 0; k < f.size(); ++k) row += "," + format_double(f[k]);
    }
    if (has_sat) {
      for (std::size_t i = 0; i < n; ++i) {
        Vec f = saturated_fit_at(log, s, i, i, 0);
        for (Eigen::Index k = 0; k < f.size(); ++k) row += "," + format_double(f[k]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double reg = log.benchmark() ? s.integrals.sum_cost[i] - s.integrals.benchmark_cost
                                   : nan;
      row += "," + format_double(reg);
    }
    row += "," + format_double(s.energy) + "," + format_double(s.max_multiplier);
    for (const auto& col : extra) row += "," + format_double(col.value(s));
    os << row << '\n';
  }
}

void write_trajectory_csv(const TrajectoryLog& log, const Graph& g, std::ostream& os) {
  const std::size_t n = log.agent_count();
  if (log.samples().empty()) return;
  const auto& first = log.samples().front().state;
  std::string header = "t";
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < first.x[i].size(); ++c)
      header += ",x_" + std::to_string(i) + "_" + std::to_string(c);
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < first.lambda[i].size(); ++k)
      header += ",lambda_" + std::to_string(i) + "_" + std::to_string(k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : g.neighbors(i))
      header += ",mu_" + std::to_string(i) + "_" + std::to_string(j);
  os << header << '\n';
  for (const auto& s : log.samples()) {
    std::string row = format_double(s.t);
    for (const auto& x : s.state.x)
      for (Eigen::Index c = 0; c < x.size(); ++c) row += "," + format_double(x[c]);
    for (const auto& l : s.state.lambda)
      for (Eigen::Index k = 0; k < l.size(); ++k) row += "," + format_double(l[k]);
    for (const auto& m : s.state.mu)
      for (double v : m) row += "," + format_double(v);
    os << row << '\n';
  }
}

}  // namespace dosp
