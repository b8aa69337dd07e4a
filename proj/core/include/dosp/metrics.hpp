#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dosp/graph.hpp"
#include "dosp/linalg.hpp"
#include "dosp/problem.hpp"
#include "dosp/state.hpp"

namespace dosp {

struct MetricsOptions {
  // Floors -delta for which saturated fit is accumulated during the run.
  std::vector<double> saturation_deltas{0.001};
};

// Running time integrals over [0, t], left-endpoint rectangles of width h
// (the same rule as the Euler stepper). Stored flat:
//   fit[i * M + offset(j) + k]  = int f_jk(t, x_i(t)) dt,   M = sum_j m_j
//   saturated[d][...]          = int max(f_jk(t, x_i(t)), -delta_d) dt
//   sum_cost[i]                = int f0(t, x_i(t)) dt,      f0 = sum_j f0j
//   disagreement[pair(i,j)]    = int ||x_i(t) - x_j(t)|| dt, i < j
struct RunningIntegrals {
  std::vector<double> fit;
  std::vector<std::vector<double>> saturated;
  std::vector<double> sum_cost;
  double benchmark_cost = 0.0;  // int f0(t, x*) dt when a benchmark is set
  std::vector<double> disagreement;
};

struct LogSample {
  std::size_t step = 0;  // k; t = k h
  double t = 0.0;
  SystemState state;
  RunningIntegrals integrals;
  double energy = 0.0;  // V relative to (x*, 0, 0); NaN without benchmark
  double max_multiplier = 0.0;
};

// Completed run: sampled states plus running integrals at each sample. The
// first sample is t = 0 and the last is t = T.
class TrajectoryLog {
 public:
  TrajectoryLog(const ProblemSpec& p, const EngineConfig& cfg,
                MetricsOptions options, std::optional<Vec> benchmark);

  std::size_t agent_count() const { return constraint_offsets_.size(); }
  std::size_t total_constraints() const { return total_constraints_; }
  std::size_t constraint_count(std::size_t j) const { return counts_.at(j); }
  std::size_t constraint_offset(std::size_t j) const {
    return constraint_offsets_.at(j);
  }
  std::size_t pair_count() const;
  std::size_t pair_index(std::size_t i, std::size_t j) const;

  double step() const { return step_; }
  double horizon() const { return horizon_; }
  double epsilon() const { return epsilon_; }
  std::size_t step_count() const { return steps_; }
  std::size_t record_every() const { return record_every_; }
  bool records_every_step() const { return record_every_ == 1; }
  const std::vector<double>& saturation_deltas() const { return options_.saturation_deltas; }
  const std::optional<Vec>& benchmark() const { return benchmark_; }

  std::vector<LogSample>& samples() { return samples_; }
  const std::vector<LogSample>& samples() const { return samples_; }
  const LogSample& final_sample() const;

  double peak_multiplier() const { return peak_multiplier_; }
  void note_multiplier(double m) { peak_multiplier_ = std::max(peak_multiplier_, m); }

  RunningIntegrals zero_integrals() const;

 private:
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> constraint_offsets_;
  std::size_t total_constraints_ = 0;
  double step_;
  double horizon_;
  double epsilon_;
  std::size_t steps_;
  std::size_t record_every_;
  MetricsOptions options_;
  std::optional<Vec> benchmark_;
  std::vector<LogSample> samples_;
  double peak_multiplier_ = 0.0;
};

// Adds one rectangle of width h at state s (time s.t) to the integrals.
// Work is split per trajectory agent; results do not depend on `workers`.
void accumulate(RunningIntegrals& acc, const SystemState& s, const ProblemSpec& p,
                const TrajectoryLog& log, double h);

// 1/2 (||x - x~||^2 + ||lambda - lambda~||^2 + ||mu - mu~||^2)
double energy(const SystemState& s, const SystemState& ref);

// R_T^i = int f0(t, x_i(t)) dt - int f0(t, x*) dt on the log's quadrature.
double regret(const TrajectoryLog& log, const ProblemSpec& p, std::size_t i,
              const Vec& xstar);
// Left-rectangle integral of f0(t, x*) over the first `steps` samples.
double benchmark_cost_integral(const ProblemSpec& p, const Vec& xstar,
                               std::size_t steps);

// F_Tj^i = int f_j(t, x_i(t)) dt for trajectory agent i and owner j.
Vec fit(const TrajectoryLog& log, std::size_t i, std::size_t j);
Vec fit_at(const TrajectoryLog& log, const LogSample& s, std::size_t i, std::size_t j);
// Variant subtracting int f_j(t, x*) dt.
Vec fit_relative(const TrajectoryLog& log, const ProblemSpec& p, std::size_t i,
                 std::size_t j, const Vec& xstar);

// int max(f_j(t, x_i(t)), -delta) dt. `delta` must be one of the log's
// saturation deltas unless every step was recorded.
Vec saturated_fit(const TrajectoryLog& log, const ProblemSpec& p, std::size_t i,
                  std::size_t j, double delta);
Vec saturated_fit_at(const TrajectoryLog& log, const LogSample& s, std::size_t i,
                     std::size_t j, std::size_t delta_index);

// int ||x_i(t) - x_j(t)|| dt; symmetric, zero on the diagonal.
double disagreement(const TrajectoryLog& log, std::size_t i, std::size_t j);
double disagreement_at(const TrajectoryLog& log, const LogSample& s, std::size_t i,
                       std::size_t j);

// Initial actions used by the bounds.
SystemState resolved_initial_state(const ProblemSpec& p, const Graph& g,
                                   const EngineConfig& cfg);
// ||x* - x(0)||^2 with x* stacked over all agents.
double initial_gap_squared(const SystemState& x0, const Vec& xstar);

// D sqrt((K + gamma) T + (1 + ||x* - x(0)||^2) / (2 eps)). Requires zero
// initial multipliers (throws BoundHypothesisViolated otherwise).
double disagreement_bound(const ProblemSpec& p, const Graph& g,
                          const EngineConfig& cfg, const Vec& xstar, double T);
double disagreement_bound_value(double diameter, double K, double gamma,
                                double epsilon, double gap_sq, double T);

// (1 + ||x* - x(0)||^2) / eps + (N - 1) L0 D sqrt((K + gamma) T +
// (1 + ||x* - x(0)||^2) / (2 eps)), reported as printed (no 1/2 on the first
// term).
double regret_bound(const ProblemSpec& p, const Graph& g, const EngineConfig& cfg,
                    const Vec& xstar, double T);
double regret_bound_value(std::size_t agents, double L0, double diameter, double K,
                          double gamma, double epsilon, double gap_sq, double T);

// sqrt((||x(0) - x*||^2 + 2 eps K T) / (2 eps - 1)) bounds ||[F_Ti^i]^+|| for
// eps > 1/2; NaN otherwise.
double own_fit_bound_value(double K, double epsilon, double gap_sq, double T);

// int [L(t, x(t), lambda~, mu~) - L(t, x~, lambda(t), mu(t))] dt - V(0) / eps.
// Needs a log that recorded every step.
double lemma1_gap(const TrajectoryLog& log, const ProblemSpec& p, const Graph& g,
                  const EngineConfig& cfg, const SystemState& reference);

// Positive part, componentwise.
Vec positive_part(const Vec& v);

struct AgentReport {
  double regret = 0.0;
  double regret_bound = 0.0;
  Vec own_fit;
  Vec own_saturated_fit;
  double own_fit_bound = 0.0;
};

struct MetricsReport {
  std::vector<AgentReport> agents;
  std::vector<double> pair_disagreement;  // indexed like TrajectoryLog pairs
  double disagreement_bound = 0.0;
  std::vector<double> energy_trace;       // one per sample
  std::vector<double> checkpoint_times;
  std::vector<double> max_disagreement_ratio;  // max pair disagreement / sqrt(t)
  std::vector<double> max_regret_ratio;        // max regret / sqrt(t)
  std::vector<double> max_fit_ratio;           // max ||[own fit]^+|| / sqrt(t)
};

MetricsReport make_report(const TrajectoryLog& log, const ProblemSpec& p,
                          const Graph& g, const EngineConfig& cfg, const Vec& xstar);

// Per-sample export. Columns, in order:
//   t, xnorm_<i> (N), gap_<i>_<j> (pairs, ||x_i - x_j||), dis_<i>_<j> (pairs,
//   running disagreement), fit_<i>_<k> (own running fit), satfit_<i>_<k>
//   (first saturation delta), regret_<i> (running; needs a benchmark),
//   energy, max_multiplier, then any extra columns.
struct ExtraColumn {
  std::string name;
  std::function<double(const LogSample&)> value;
};
void write_metrics_csv(const TrajectoryLog& log, std::ostream& os,
                       const std::vector<ExtraColumn>& extra = {});

// t, x_<i>_<c>, lambda_<i>_<k>, mu_<i>_<j> per sample.
void write_trajectory_csv(const TrajectoryLog& log, const Graph& g, std::ostream& os);

// Round-trip formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace dosp
