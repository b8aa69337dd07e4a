#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dosp/errors.hpp"
#include "dosp/graph.hpp"
#include "dosp/scenarios.hpp"
#include "dosp/state.hpp"

namespace dosp::cli {

// Config parse or validation failure. `field` is the dotted key path and
// `line` is 1-based (0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& what)
      : Error("ConfigError", what), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

struct GraphConfig {
  std::string generator;    // generator spec, empty when edges are listed
  std::vector<Edge> edges;  // explicit edge list
  std::size_t nodes = 0;    // defaults to the scenario's agent count
};

struct OracleConfig {
  std::string method = "auto";  // auto, grid, subgradient
  std::size_t resolution = 101;
  std::size_t iterations = 2000;
  double step_scale = 0.5;
};

enum class InitialPolicy { kOrigin, kRandom, kExplicit };

struct RunConfig {
  std::filesystem::path source;
  std::uint64_t seed = 0;
  std::string scenario;
  ScenarioParams params;
  GraphConfig graph;
  EngineConfig engine;  // initial_state and workers are filled at run time
  InitialPolicy initial_policy = InitialPolicy::kOrigin;
  std::vector<Vec> initial_x;       // explicit policy, one per agent
  double initial_multiplier = 0.0;  // fill value for lambda(0) and mu(0)
  OracleConfig oracle;
  std::vector<double> saturation_deltas{0.001};
  std::filesystem::path output_dir;
};

// Parses and validates a YAML run config. Unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& source);

const CommonParams& common_params(const ScenarioParams& params);
CommonParams& common_params(ScenarioParams& params);

// Scenario, graph and initial state as described by the config.
Scenario build_scenario(const RunConfig& cfg);
Graph build_graph(const RunConfig& cfg);
SystemState build_initial_state(const RunConfig& cfg, const ProblemSpec& p,
                                const Graph& g);

}  // namespace dosp::cli
