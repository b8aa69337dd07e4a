#include "dosp/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "dosp/errors.hpp"
#include "dosp/rng.hpp"

namespace dosp {
namespace {

void check_common(const CommonParams& c) {
  if (c.agents == 0) throw ScenarioError("agents must be >= 1");
  if (c.dim <= 0) throw ScenarioError("dim must be >= 1");
  if (!(c.gamma >= 0.0)) throw ScenarioError("gamma must be >= 0");
  if (!(c.horizon >= 0.0)) throw ScenarioError("horizon must be >= 0");
  if (!(c.step > 0.0)) throw ScenarioError("step must be > 0");
  if (!(c.box_half_width > 0.0)) throw ScenarioError("box_half_width must be > 0");
}

Vec random_unit(Rng& rng, Eigen::Index dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  do {
    for (Eigen::Index k = 0; k < dim; ++k) v[k] = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// Adds the oscillation of angle `theta` to the first two coordinates.
void add_rotation(Vec& v, double scale, double theta) {
  if (v.size() >= 2) {
    v[0] += scale * std::cos(theta);
    v[1] += scale * std::sin(theta);
  } else {
    v[0] += scale * std::sin(theta);
  }
}

// ---------------------------------------------------------------------------

class QuadraticTracking final : public Environment {
 public:
  QuadraticTracking(const QuadraticTrackingParams& p, std::vector<Vec> centers,
                    std::vector<std::vector<Vec>> normals,
                    std::vector<std::vector<double>> offsets)
      : p_(p),
        centers_(std::move(centers)),
        normals_(std::move(normals)),
        offsets_(std::move(offsets)) {}

  std::size_t agent_count() const override { return p_.common.agents; }
  Eigen::Index action_dim() const override { return p_.common.dim; }
  std::size_t constraint_count(std::size_t) const override {
    return p_.constraints_per_agent;
  }

  Vec target(std::size_t i, double t) const {
    Vec r = centers_[i];
    double phase = 2.0 * std::numbers::pi * static_cast<double>(i) /
                   static_cast<double>(p_.common.agents);
    add_rotation(r, p_.amplitude, p_.frequency * t + phase);
    return r;
  }

  double cost(std::size_t i, double t, const Vec& x) const override {
    return 0.5 * (x - target(i, t)).squaredNorm();
  }
  Vec cost_subgradient(std::size_t i, double t, const Vec& x) const override {
    return x - target(i, t);
  }
  Vec constraints(std::size_t i, double t, const Vec& x) const override {
    Vec out(static_cast<Eigen::Index>(p_.constraints_per_agent));
    double shift = p_.drift * std::sin(p_.drift_frequency * t);
    for (std::size_t k = 0; k < p_.constraints_per_agent; ++k) {
      out[static_cast<Eigen::Index>(k)] =
          normals_[i][k].dot(x) - (offsets_[i][k] + shift);
    }
    return out;
  }
  Vec constraint_subgradient(std::size_t i, double, const Vec&,
                             std::size_t k) const override {
    return normals_[i].at(k);
  }

 private:
  QuadraticTrackingParams p_;
  std::vector<Vec> centers_;
  std::vector<std::vector<Vec>> normals_;
  std::vector<std::vector<double>> offsets_;
};

Scenario make_quadratic_tracking(const QuadraticTrackingParams& p,
                                 std::uint64_t seed) {
  const auto& c = p.common;
  check_common(c);
  if (!(p.offset_min > 0.0) || !(p.offset_max >= p.offset_min)) {
    throw ScenarioError("need 0 < offset_min <= offset_max");
  }
  if (!(std::abs(p.drift) < p.offset_min)) {
    throw ScenarioError("|drift| must be below offset_min to keep x = 0 feasible");
  }
  if (!(p.spread >= 0.0) || !(p.amplitude >= 0.0)) {
    throw ScenarioError("spread and amplitude must be >= 0");
  }

  auto target_rng = substream(seed, "targets");
  auto constraint_rng = substream(seed, "constraints");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> offset(p.offset_min, p.offset_max);

  std::vector<Vec> centers(c.agents);
  for (auto& ctr : centers) {
    ctr = Vec::Constant(c.dim, p.center);
    for (Eigen::Index k = 0; k < c.dim; ++k) ctr[k] += p.spread * unit(target_rng);
  }
  std::vector<std::vector<Vec>> normals(c.agents);
  std::vector<std::vector<double>> offsets(c.agents);
  for (std::size_t i = 0; i < c.agents; ++i) {
    for (std::size_t k = 0; k < p.constraints_per_agent; ++k) {
      normals[i].push_back(random_unit(constraint_rng, c.dim));
      offsets[i].push_back(offset(constraint_rng));
    }
  }
  if (p.shared_constraints) {
    for (std::size_t i = 1; i < c.agents; ++i) {
      normals[i] = normals[0];
      offsets[i] = offsets[0];
    }
  }

  Scenario s;
  auto& prob = s.problem;
  prob.name = "quadratic_tracking";
  prob.action_set = ActionSet::symmetric_box(c.dim, c.box_half_width);
  double l0 = 0.0;
  for (const auto& ctr : centers) {
    l0 = std::max(l0, prob.action_set.max_distance_to(ctr) + p.amplitude);
  }
  prob.env = std::make_shared<QuadraticTracking>(p, centers, normals, offsets);
  prob.gamma = c.gamma;
  prob.constants.lipschitz_cost = l0;
  prob.constants.lipschitz_constraint = 1.0;
  // f0(t,x*) - min f0 <= sum_i 1/2 max_x ||x - r_i||^2.
  prob.constants.cost_floor_gap = 0.5 * static_cast<double>(c.agents) * l0 * l0;
  prob.feasible_witness = Vec::Zero(c.dim);
  prob.horizon = c.horizon;
  prob.sample_step = c.step;
  validate(prob);
  return s;
}

// ---------------------------------------------------------------------------

class LinearFeasibility final : public Environment {
 public:
  LinearFeasibility(const LinearFeasibilityParams& p, std::vector<Vec> cost_dirs)
      : p_(p), cost_dirs_(std::move(cost_dirs)) {}

  std::size_t agent_count() const override { return p_.common.agents; }
  Eigen::Index action_dim() const override { return p_.common.dim; }
  std::size_t constraint_count(std::size_t) const override {
    return p_.constraints_per_agent;
  }

  Vec normal(std::size_t i, std::size_t k, double t) const {
    double m = static_cast<double>(p_.constraints_per_agent);
    double idx = static_cast<double>(i) * m + static_cast<double>(k);
    double theta = p_.phase +
                   2.0 * std::numbers::pi * idx /
                       (static_cast<double>(p_.common.agents) * m) +
                   p_.rotation_rate * t;
    Vec a = Vec::Zero(p_.common.dim);
    if (a.size() >= 2) {
      a[0] = std::cos(theta);
      a[1] = std::sin(theta);
    } else {
      a[0] = std::cos(theta) >= 0.0 ? 1.0 : -1.0;
    }
    return a;
  }

  double cost(std::size_t i, double, const Vec& x) const override {
    return p_.cost_weight * cost_dirs_[i].dot(x);
  }
  Vec cost_subgradient(std::size_t i, double, const Vec&) const override {
    return p_.cost_weight * cost_dirs_[i];
  }
  Vec constraints(std::size_t i, double t, const Vec& x) const override {
    Vec out(static_cast<Eigen::Index>(p_.constraints_per_agent));
    for (std::size_t k = 0; k < p_.constraints_per_agent; ++k) {
      out[static_cast<Eigen::Index>(k)] = normal(i, k, t).dot(x) - p_.offset;
    }
    return out;
  }
  Vec constraint_subgradient(std::size_t i, double t, const Vec&,
                             std::size_t k) const override {
    return normal(i, k, t);
  }

 private:
  LinearFeasibilityParams p_;
  std::vector<Vec> cost_dirs_;
};

Scenario make_linear_feasibility(const LinearFeasibilityParams& p,
                                 std::uint64_t seed) {
  const auto& c = p.common;
  check_common(c);
  if (!(p.offset > 0.0)) throw ScenarioError("offset must be > 0");
  if (!(p.cost_weight >= 0.0)) throw ScenarioError("cost_weight must be >= 0");

  auto rng = substream(seed, "costs");
  std::vector<Vec> dirs(c.agents);
  for (auto& d : dirs) d = random_unit(rng, c.dim);

  Scenario s;
  auto& prob = s.problem;
  prob.name = "linear_feasibility";
  prob.action_set = ActionSet::symmetric_box(c.dim, c.box_half_width);
  prob.env = std::make_shared<LinearFeasibility>(p, dirs);
  prob.gamma = c.gamma;
  constexpr double kTiny = 1e-12;
  prob.constants.lipschitz_cost = std::max(p.cost_weight, kTiny);
  prob.constants.lipschitz_constraint = 1.0;
  prob.constants.cost_floor_gap =
      std::max(2.0 * static_cast<double>(c.agents) * p.cost_weight *
                   prob.action_set.max_norm(),
               kTiny);
  prob.feasible_witness = Vec::Zero(c.dim);
  prob.horizon = c.horizon;
  prob.sample_step = c.step;
  validate(prob);
  return s;
}

// ---------------------------------------------------------------------------

class Classifier final : public Environment {
 public:
  Classifier(const ClassifierParams& p, std::shared_ptr<const FeatureStream> s)
      : p_(p), stream_(std::move(s)) {}

  std::size_t agent_count() const override { return stream_->agent_count(); }
  Eigen::Index action_dim() const override { return stream_->dim(); }
  std::size_t constraint_count(std::size_t) const override {
    return p_.regularized ? 0 : 1;
  }

  double cost(std::size_t i, double t, const Vec& x) const override {
    if (p_.regularized) {
      const auto& s = stream_->at(i, t);
      return logistic_loss(s.y, s.z, x) + p_.alpha * x.lpNorm<1>();
    }
    return x.lpNorm<1>() / static_cast<double>(agent_count());
  }
  Vec cost_subgradient(std::size_t i, double t, const Vec& x) const override {
    if (p_.regularized) {
      const auto& s = stream_->at(i, t);
      return logistic_loss_gradient(s.y, s.z, x) + p_.alpha * l1_subgradient(x);
    }
    return l1_subgradient(x) / static_cast<double>(agent_count());
  }
  Vec constraints(std::size_t i, double t, const Vec& x) const override {
    if (p_.regularized) return Vec();
    const auto& s = stream_->at(i, t);
    Vec out(1);
    out[0] = logistic_loss(s.y, s.z, x) - p_.delta;
    return out;
  }
  Vec constraint_subgradient(std::size_t i, double t, const Vec& x,
                             std::size_t) const override {
    const auto& s = stream_->at(i, t);
    return logistic_loss_gradient(s.y, s.z, x);
  }

 private:
  ClassifierParams p_;
  std::shared_ptr<const FeatureStream> stream_;
};

void check_classifier(const ClassifierParams& p) {
  check_common(p.common);
  if (!(p.delta > 0.0)) throw ScenarioError("delta must be > 0");
  if (p.regularized && !(p.alpha > 0.0)) throw ScenarioError("alpha must be > 0");
}

// Class-conditional Gaussian: mean s * (y e_0 + c e_1), isotropic noise.
LabeledSample draw_feature(Rng& rng, double y, const ClassifierParams& p) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto n = p.common.dim;
  Vec z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = p.feature_noise * g(rng);
  z[0] += p.feature_separation * y;
  if (n >= 2) z[1] += p.feature_separation * p.feature_offset;
  return {z, y};
}

// Scales e_0 until every stream sample is classified with loss below delta.
std::optional<Vec> separating_witness(const FeatureStream& s,
                                      const ClassifierParams& p,
                                      const ActionSet& set) {
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.agent_count(); ++i)
    for (std::size_t k = 0; k < s.samples_per_agent(); ++k) {
      const auto& smp = s.sample(i, k);
      min_margin = std::min(min_margin, smp.y * smp.z[0]);
    }
  if (!(min_margin > 0.0)) return std::nullopt;
  // loss(m) < delta  <=>  m > -log(expm1(delta))
  double needed = -std::log(std::expm1(p.delta)) + 1.0;
  Vec w = Vec::Zero(s.dim());
  w[0] = needed / min_margin;
  if (!set.contains(w)) return std::nullopt;
  return w;
}

void finish_classifier(Scenario& s, const ClassifierParams& p,
                       std::shared_ptr<const FeatureStream> stream,
                       const std::string& name) {
  const auto& c = p.common;
  auto& prob = s.problem;
  prob.name = name;
  prob.action_set = ActionSet::symmetric_box(stream->dim(), c.box_half_width);
  prob.env = std::make_shared<Classifier>(p, stream);
  prob.gamma = c.gamma;
  prob.horizon = c.horizon;
  prob.sample_step = c.step;
  const double n = static_cast<double>(stream->dim());
  const double agents = static_cast<double>(stream->agent_count());
  const double zmax = stream->max_feature_norm();
  const double b = c.box_half_width;
  if (p.regularized) {
    prob.regularizer_weight = p.alpha;
    prob.constants.lipschitz_cost = zmax + p.alpha * std::sqrt(n);
    prob.constants.lipschitz_constraint = 1.0;
    // loss <= softplus(||x|| ||z||) and ||x||_1 <= n B on the box.
    double loss_max = softplus(std::sqrt(n) * b * zmax);
    prob.constants.cost_floor_gap = agents * (loss_max + p.alpha * n * b);
    prob.feasible_witness = Vec::Zero(stream->dim());
  } else {
    prob.constants.lipschitz_cost = std::sqrt(n) / agents;
    prob.constants.lipschitz_constraint = std::max(zmax, 1e-12);
    prob.constants.cost_floor_gap = n * b;
    prob.feasible_witness = separating_witness(*stream, p, prob.action_set);
  }
  s.features = std::move(stream);
  validate(prob);
}

Scenario make_classifier_synthetic(const ClassifierParams& p, std::uint64_t seed) {
  check_classifier(p);
  const auto& c = p.common;
  if (!(p.arena_half_width > 0.0) || !(p.walk_period > 0.0) ||
      !(p.walk_variance >= 0.0) || !(p.road_half_width >= 0.0)) {
    throw ScenarioError("arena, walk period, walk variance and road width must be positive");
  }
  const auto steps = static_cast<std::size_t>(std::llround(c.horizon / c.step));
  auto stream = std::make_shared<FeatureStream>(c.agents, c.dim, c.step, steps + 1);

  auto walk_rng = substream(seed, "walks");
  auto feature_rng = substream(seed, "features");
  std::uniform_real_distribution<double> start(-p.arena_half_width, p.arena_half_width);
  std::normal_distribution<double> stride(0.0, std::sqrt(p.walk_variance));
  const double L = p.arena_half_width;
  auto reflect = [L](double v) {
    // Reflect into [-L, L].
    const double period = 4.0 * L;
    double u = std::fmod(v + L, period);
    if (u < 0) u += period;
    return u <= 2.0 * L ? u - L : 3.0 * L - u;
  };

  Scenario s;
  s.positions.assign(c.agents, {});
  for (std::size_t i = 0; i < c.agents; ++i) {
    double px = start(walk_rng);
    double py = start(walk_rng);
    std::size_t period_index = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double tk = static_cast<double>(k) * c.step;
      const auto due = static_cast<std::size_t>(std::floor(tk / p.walk_period + 1e-9));
      while (period_index < due) {
        px = reflect(px + stride(walk_rng));
        py = reflect(py + stride(walk_rng));
        ++period_index;
      }
      s.positions[i].push_back({px, py});
    }
  }
  // Features are drawn step-major so the stream does not depend on how the
  // walks were generated.
  for (std::size_t k = 0; k <= steps; ++k) {
    for (std::size_t i = 0; i < c.agents; ++i) {
      auto [px, py] = s.positions[i][k];
      double y = terrain_label(px, py, p.road_half_width, p.road_cross);
      stream->set(i, k, draw_feature(feature_rng, y, p));
    }
  }

  auto holdout_rng = substream(seed, "holdout");
  for (std::size_t k = 0; k < p.holdout_size; ++k) {
    double y = (k % 2 == 0) ? 1.0 : -1.0;
    s.holdout.push_back(draw_feature(holdout_rng, y, p));
  }

  finish_classifier(s, p, stream, "sparse_classifier_synthetic");
  return s;
}

Scenario make_classifier_csv(const ClassifierParams& p) {
  check_classifier(p);
  const auto& c = p.common;
  if (p.csv_path.empty()) throw ScenarioError("csv_path is required");
  std::ifstream in(p.csv_path);
  if (!in) throw ScenarioError("cannot open feature CSV '" + p.csv_path + "'");
  auto rows = read_feature_csv(in, p.csv_path);
  if (!rows.empty() && rows.front().z.size() != c.dim) {
    throw CsvSchemaError(p.csv_path + ": feature dimension " +
                         std::to_string(rows.front().z.size()) +
                         " differs from configured dim " + std::to_string(c.dim));
  }
  auto stream = std::make_shared<FeatureStream>(
      stream_from_rows(rows, c.agents, c.step, c.horizon));

  Scenario s;
  if (!p.holdout_csv_path.empty()) {
    std::ifstream hin(p.holdout_csv_path);
    if (!hin) throw ScenarioError("cannot open holdout CSV '" + p.holdout_csv_path + "'");
    for (auto& r : read_feature_csv(hin, p.holdout_csv_path)) {
      if (r.z.size() != c.dim) throw CsvSchemaError("holdout feature dimension");
      s.holdout.push_back({std::move(r.z), r.label});
    }
  }
  finish_classifier(s, p, stream, "sparse_classifier_csv");
  return s;
}

template <class T>
const T& expect(const ScenarioParams& params, std::string_view name) {
  if (const T* p = std::get_if<T>(&params)) return *p;
  throw ScenarioError("parameters do not match scenario '" + std::string(name) + "'");
}

}  // namespace

double terrain_label(double px, double py, double road_half_width, bool cross) {
  bool on_road = std::abs(px) < road_half_width ||
                 (cross && std::abs(py) < road_half_width);
  return on_road ? -1.0 : 1.0;
}

double classification_error(const Vec& x, const std::vector<LabeledSample>& samples) {
  if (samples.empty()) return 0.0;
  std::size_t wrong = 0;
  for (const auto& s : samples) {
    double score = x.dot(s.z);
    if (!(score * s.y > 0.0)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(samples.size());
}

std::vector<std::string> scenario_names() {
  return {"quadratic_tracking", "linear_feasibility", "sparse_classifier_synthetic",
          "sparse_classifier_csv"};
}

Scenario make_scenario(std::string_view name, const ScenarioParams& params,
                       std::uint64_t seed) {
  if (name == "quadratic_tracking") {
    return make_quadratic_tracking(expect<QuadraticTrackingParams>(params, name), seed);
  }
  if (name == "linear_feasibility") {
    return make_linear_feasibility(expect<LinearFeasibilityParams>(params, name), seed);
  }
  if (name == "sparse_classifier_synthetic") {
    return make_classifier_synthetic(expect<ClassifierParams>(params, name), seed);
  }
  if (name == "sparse_classifier_csv") {
    return make_classifier_csv(expect<ClassifierParams>(params, name));
  }
  throw ScenarioError("unknown scenario '" + std::string(name) + "'");
}

}  // namespace dosp
