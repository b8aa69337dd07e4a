#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dosp/feature_stream.hpp"
#include "dosp/problem.hpp"

namespace dosp {

// Knobs shared by every scenario.
struct CommonParams {
  std::size_t agents = 4;
  Eigen::Index dim = 2;
  double gamma = 1.0;
  double horizon = 10.0;  // T
  double step = 0.01;     // h
  double box_half_width = 2.0;
};

// f0i(t,x) = 1/2 ||x - r_i(t)||^2 with r_i(t) = c_i + A * (cos, sin)(w t + phi_i)
// on the first two coordinates, and m linear constraints
// <a_ik, x> - b_ik(t) <= 0 with b_ik(t) = b_ik + drift * sin(w_c t) > 0.
struct QuadraticTrackingParams {
  CommonParams common;
  double center = 1.5;     // every coordinate of the shared target center
  double spread = 0.5;     // per-agent center offset, uniform in [-spread, spread]
  double amplitude = 0.5;  // A
  double frequency = 1.0;  // w
  std::size_t constraints_per_agent = 1;
  double offset_min = 0.5;
  double offset_max = 1.0;
  double drift = 0.0;
  double drift_frequency = 0.5;
  bool shared_constraints = false;  // every agent uses agent 0's constraints
};

// f0i(t,x) = c <w_i, x>, constraints <a_ik(t), x> - b <= 0 where a_ik(t) is a
// unit vector rotating at `rotation_rate` in the first two coordinates.
struct LinearFeasibilityParams {
  CommonParams common;
  std::size_t constraints_per_agent = 1;
  double offset = 1.0;  // b > 0, so x = 0 is strictly feasible
  double rotation_rate = 0.0;
  double phase = 0.0;
  double cost_weight = 0.1;
};

// Sparse classifier over a robot team at a road intersection. Constrained
// form: f0i = ||x||_1 / N, fi = logistic_loss - delta. Regularized form:
// f0i = logistic_loss + alpha ||x||_1 and no constraints.
struct ClassifierParams {
  CommonParams common;
  bool regularized = false;
  double delta = 0.001;
  double alpha = 0.05;
  // Synthetic features.
  double arena_half_width = 15.0;  // L
  double road_half_width = 5.0;
  bool road_cross = true;          // cross of two strips vs. a single strip
  double walk_variance = 1.0;      // sigma_w
  double walk_period = 1.0;        // T_s
  double feature_separation = 2.0;
  double feature_offset = 0.5;     // class-mean component shared by both labels
  double feature_noise = 0.1;
  std::size_t holdout_size = 2000;
  // CSV ingestion.
  std::string csv_path;
  std::string holdout_csv_path;
};

using ScenarioParams =
    std::variant<QuadraticTrackingParams, LinearFeasibilityParams, ClassifierParams>;

struct Scenario {
  ProblemSpec problem;
  std::shared_ptr<const FeatureStream> features;
  std::vector<LabeledSample> holdout;
  // Synthetic classifier only: agent positions on the step grid.
  std::vector<std::vector<std::pair<double, double>>> positions;
};

// Scenario ids: quadratic_tracking, linear_feasibility,
// sparse_classifier_synthetic, sparse_classifier_csv. Deterministic for a
// fixed seed. Throws ScenarioError or CsvSchemaError.
Scenario make_scenario(std::string_view name, const ScenarioParams& params,
                       std::uint64_t seed);

std::vector<std::string> scenario_names();

// Label observed at a position: -1 on the road ("pavement"), +1 otherwise.
double terrain_label(double px, double py, double road_half_width, bool cross);

// Fraction of samples with sign(<x, z>) != y; a zero score counts as an error.
double classification_error(const Vec& x, const std::vector<LabeledSample>& samples);

}  // namespace dosp
