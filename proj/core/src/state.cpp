#include "dosp/state.hpp"

#include <cmath>

#include "dosp/errors.hpp"

namespace dosp {

double SystemState::max_multiplier() const {
  double m = 0.0;
  for (const auto& l : lambda)
    if (l.size() > 0) m = std::max(m, l.cwiseAbs().maxCoeff());
  for (const auto& row : mu)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

bool SystemState::all_finite() const {
  if (!std::isfinite(t)) return false;
  for (const auto& v : x)
    if (!v.allFinite()) return false;
  for (const auto& v : lambda)
    if (!v.allFinite()) return false;
  for (const auto& row : mu)
    for (double v : row)
      if (!std::isfinite(v)) return false;
  return true;
}

SystemState initial_state(const ProblemSpec& p, const Graph& g) {
  SystemState s;
  const std::size_t n = p.agent_count();
  const Vec origin = p.action_set.project(Vec::Zero(p.action_dim()));
  s.x.assign(n, origin);
  s.lambda.resize(n);
  s.mu.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.lambda[i] = Vec::Zero(static_cast<Eigen::Index>(p.constraint_count(i)));
    s.mu[i].assign(g.degree(i), 0.0);
  }
  return s;
}

void check_shape(const SystemState& s, const ProblemSpec& p, const Graph& g) {
  const std::size_t n = p.agent_count();
  if (g.node_count() != n) {
    throw DimensionMismatch("graph has " + std::to_string(g.node_count()) +
                            " nodes but the problem has " + std::to_string(n) +
                            " agents");
  }
  if (s.x.size() != n || s.lambda.size() != n || s.mu.size() != n) {
    throw DimensionMismatch("state agent count differs from the problem");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.x[i].size() != p.action_dim()) {
      throw DimensionMismatch("x_" + std::to_string(i) + " has wrong dimension");
    }
    if (static_cast<std::size_t>(s.lambda[i].size()) != p.constraint_count(i)) {
      throw DimensionMismatch("lambda_" + std::to_string(i) + " has wrong size");
    }
    if (s.mu[i].size() != g.degree(i)) {
      throw DimensionMismatch("mu_" + std::to_string(i) + " has wrong size");
    }
  }
}

Vec flatten_primal(const SystemState& s) {
  Eigen::Index total = 0;
  for (const auto& v : s.x) total += v.size();
  Vec out(total);
  Eigen::Index at = 0;
  for (const auto& v : s.x) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

Vec flatten_lambda(const SystemState& s) {
  Eigen::Index total = 0;
  for (const auto& v : s.lambda) total += v.size();
  Vec out(total);
  Eigen::Index at = 0;
  for (const auto& v : s.lambda) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

Vec flatten_mu(const SystemState& s) {
  std::vector<double> flat;
  for (const auto& row : s.mu) flat.insert(flat.end(), row.begin(), row.end());
  return Eigen::Map<const Vec>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

std::size_t EngineConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(horizon / step));
}

void validate(const EngineConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
    throw InvalidArgument("epsilon must be > 0");
  }
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) {
    throw InvalidArgument("step must be > 0");
  }
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) {
    throw InvalidArgument("horizon must be >= 0");
  }
  if (cfg.horizon > 0.0 && cfg.horizon < cfg.step * (1.0 - 1e-12)) {
    throw InvalidArgument("horizon must be >= step");
  }
  if (cfg.record_every == 0) throw InvalidArgument("record_every must be >= 1");
  if (cfg.workers == 0) throw InvalidArgument("workers must be >= 1");
}

}  // namespace dosp
