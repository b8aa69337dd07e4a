#include "dosp/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dosp/rng.hpp"

namespace dosp::cli {
namespace {

int line_of(const YAML::Node& n) { return n.IsDefined() ? n.Mark().line + 1 : 0; }

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Typed access to one YAML mapping with unknown-key detection.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, int parent_line = 0)
      : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) {
      throw ConfigError(path_, node_.IsDefined() ? line_of(node_) : parent_line,
                        "expected a mapping");
    }
  }

  int line() const { return line_of(node_); }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  int key_line(const std::string& key) const {
    for (const auto& kv : node_) {
      if (kv.first.as<std::string>() == key) return line_of(kv.first);
    }
    return line();
  }

  template <class T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v) return false;
    out = convert<T>(v, join(path_, key));
    return true;
  }

  template <class T>
  void require(const std::string& key, T& out) {
    if (!get(key, out)) throw ConfigError(join(path_, key), line(), "missing required key");
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) {
        throw ConfigError(join(path_, key), line_of(kv.first), "unknown key");
      }
    }
  }

  template <class T>
  static T convert(const YAML::Node& v, const std::string& field) {
    if (!v.IsScalar()) throw ConfigError(field, line_of(v), "expected a scalar");
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        const long long s = v.as<long long>();
        if (s < 0) throw ConfigError(field, line_of(v), "must be >= 0");
        return static_cast<T>(s);
      } else if constexpr (std::is_same_v<T, double>) {
        const double d = v.as<double>();
        if (!std::isfinite(d)) throw ConfigError(field, line_of(v), "must be finite");
        return d;
      } else {
        return v.as<T>();
      }
    } catch (const YAML::BadConversion&) {
      throw ConfigError(field, line_of(v), "cannot convert '" + v.Scalar() + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, Section& s, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(join(s.path(), key), s.key_line(key), what);
}

void read_common(Section& s, CommonParams& c) {
  s.get("agents", c.agents);
  std::size_t dim = static_cast<std::size_t>(c.dim);
  s.get("dim", dim);
  c.dim = static_cast<Eigen::Index>(dim);
  s.get("gamma", c.gamma);
  s.get("box_half_width", c.box_half_width);
  check(c.agents >= 1, s, "agents", "must be >= 1");
  check(c.dim >= 1, s, "dim", "must be >= 1");
  check(c.gamma >= 0.0, s, "gamma", "must be >= 0");
  check(c.box_half_width > 0.0, s, "box_half_width", "must be > 0");
}

ScenarioParams read_scenario(Section& s, const std::string& name,
                             const std::filesystem::path& base) {
  if (name == "quadratic_tracking") {
    QuadraticTrackingParams q;
    read_common(s, q.common);
    s.get("center", q.center);
    s.get("spread", q.spread);
    s.get("amplitude", q.amplitude);
    s.get("frequency", q.frequency);
    s.get("constraints_per_agent", q.constraints_per_agent);
    s.get("offset_min", q.offset_min);
    s.get("offset_max", q.offset_max);
    s.get("drift", q.drift);
    s.get("drift_frequency", q.drift_frequency);
    s.get("shared_constraints", q.shared_constraints);
    check(q.offset_min > 0.0, s, "offset_min", "must be > 0");
    check(q.offset_max >= q.offset_min, s, "offset_max", "must be >= offset_min");
    check(q.spread >= 0.0, s, "spread", "must be >= 0");
    check(q.amplitude >= 0.0, s, "amplitude", "must be >= 0");
    return q;
  }
  if (name == "linear_feasibility") {
    LinearFeasibilityParams l;
    read_common(s, l.common);
    s.get("constraints_per_agent", l.constraints_per_agent);
    s.get("offset", l.offset);
    s.get("rotation_rate", l.rotation_rate);
    s.get("phase", l.phase);
    s.get("cost_weight", l.cost_weight);
    check(l.offset > 0.0, s, "offset", "must be > 0");
    check(l.cost_weight >= 0.0, s, "cost_weight", "must be >= 0");
    return l;
  }
  if (name == "sparse_classifier_synthetic" || name == "sparse_classifier_csv") {
    ClassifierParams c;
    read_common(s, c.common);
    s.get("regularized", c.regularized);
    s.get("delta", c.delta);
    s.get("alpha", c.alpha);
    check(c.delta > 0.0, s, "delta", "must be > 0");
    check(!c.regularized || c.alpha > 0.0, s, "alpha", "must be > 0");
    if (name == "sparse_classifier_synthetic") {
      s.get("arena_half_width", c.arena_half_width);
      s.get("road_half_width", c.road_half_width);
      s.get("road_cross", c.road_cross);
      s.get("walk_variance", c.walk_variance);
      s.get("walk_period", c.walk_period);
      s.get("feature_separation", c.feature_separation);
      s.get("feature_offset", c.feature_offset);
      s.get("feature_noise", c.feature_noise);
      s.get("holdout_size", c.holdout_size);
      check(c.arena_half_width > 0.0, s, "arena_half_width", "must be > 0");
      check(c.road_half_width > 0.0, s, "road_half_width", "must be > 0");
      check(c.walk_variance > 0.0, s, "walk_variance", "must be > 0");
      check(c.walk_period > 0.0, s, "walk_period", "must be > 0");
      check(c.feature_noise >= 0.0, s, "feature_noise", "must be >= 0");
    } else {
      s.require("csv", c.csv_path);
      s.get("holdout_csv", c.holdout_csv_path);
      auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) {
          p = (base / p).lexically_normal().string();
        }
      };
      resolve(c.csv_path);
      resolve(c.holdout_csv_path);
    }
    return c;
  }
  throw ConfigError(join(s.path(), "name"), s.key_line("name"),
                    "unknown scenario '" + name + "'");
}

GraphConfig read_graph(const YAML::Node& node, int parent_line) {
  GraphConfig g;
  if (!node) throw ConfigError("graph", parent_line, "missing required key");
  if (node.IsScalar()) {
    g.generator = node.as<std::string>();
    return g;
  }
  Section s(node, "graph");
  s.get("nodes", g.nodes);
  const bool has_gen = s.get("generator", g.generator);
  const YAML::Node edges = s.raw("edges");
  if (has_gen == static_cast<bool>(edges)) {
    throw ConfigError("graph", s.line(), "give exactly one of generator or edges");
  }
  if (edges) {
    if (!edges.IsSequence()) {
      throw ConfigError("graph.edges", line_of(edges), "expected a list of [i, j] pairs");
    }
    for (const auto& e : edges) {
      if (!e.IsSequence() || e.size() != 2) {
        throw ConfigError("graph.edges", line_of(e), "edge must be [i, j]");
      }
      g.edges.push_back({Section::convert<std::size_t>(e[0], "graph.edges"),
                         Section::convert<std::size_t>(e[1], "graph.edges")});
    }
  }
  s.finish();
  return g;
}

}  // namespace

const CommonParams& common_params(const ScenarioParams& params) {
  return std::visit([](const auto& p) -> const CommonParams& { return p.common; }, params);
}

CommonParams& common_params(ScenarioParams& params) {
  return std::visit([](auto& p) -> CommonParams& { return p.common; }, params);
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<document>", e.mark.line + 1, e.msg);
  }
  RunConfig cfg;
  cfg.source = source;
  const std::filesystem::path base =
      source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");
  Section top(root, "");
  top.get("seed", cfg.seed);

  std::string out;
  if (top.get("output_dir", out)) cfg.output_dir = out;

  // Scenario first: the graph and engine refer to its agent count.
  const YAML::Node scen = top.raw("scenario");
  if (!scen) throw ConfigError("scenario", top.line(), "missing required key");
  Section ss(scen, "scenario");
  ss.require("name", cfg.scenario);
  cfg.params = read_scenario(ss, cfg.scenario, base);
  ss.finish();
  const std::size_t agents = common_params(cfg.params).agents;

  cfg.graph = read_graph(top.raw("graph"), top.line());
  if (cfg.graph.nodes == 0) cfg.graph.nodes = agents;
  if (cfg.graph.nodes != agents) {
    throw ConfigError("graph.nodes", top.key_line("graph"),
                      "node count must equal scenario.agents");
  }

  const YAML::Node eng = top.raw("engine");
  if (!eng) throw ConfigError("engine", top.line(), "missing required key");
  Section es(eng, "engine");
  EngineConfig& e = cfg.engine;
  es.require("epsilon", e.epsilon);
  es.require("step", e.step);
  es.require("horizon", e.horizon);
  es.get("record_every", e.record_every);
  check(e.epsilon > 0.0, es, "epsilon", "must be > 0");
  check(e.step > 0.0, es, "step", "must be > 0");
  check(e.horizon >= 0.0, es, "horizon", "must be >= 0");
  check(e.horizon == 0.0 || e.horizon >= e.step, es, "horizon",
        "must be 0 or at least one step");
  check(e.record_every >= 1, es, "record_every", "must be >= 1");
  std::string coupling = "full";
  es.get("coupling", coupling);
  if (coupling == "full") {
    e.coupling = PrimalCoupling::kFullLagrangian;
  } else if (coupling == "local") {
    e.coupling = PrimalCoupling::kLocalOnly;
  } else {
    check(false, es, "coupling", "must be 'full' or 'local'");
  }
  std::string policy = "origin";
  es.get("initial_state", policy);
  if (policy == "origin") {
    cfg.initial_policy = InitialPolicy::kOrigin;
  } else if (policy == "random") {
    cfg.initial_policy = InitialPolicy::kRandom;
  } else if (policy == "explicit") {
    cfg.initial_policy = InitialPolicy::kExplicit;
  } else {
    check(false, es, "initial_state", "must be origin, random or explicit");
  }
  const YAML::Node x0 = es.raw("initial_x");
  if (cfg.initial_policy == InitialPolicy::kExplicit) {
    if (!x0 || !x0.IsSequence() || x0.size() != agents) {
      throw ConfigError("engine.initial_x", x0 ? line_of(x0) : es.line(),
                        "explicit policy needs one action per agent");
    }
    const auto dim = common_params(cfg.params).dim;
    for (const auto& row : x0) {
      if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != dim) {
        throw ConfigError("engine.initial_x", line_of(row), "action has wrong dimension");
      }
      Vec v(dim);
      for (Eigen::Index k = 0; k < dim; ++k) {
        v[k] = Section::convert<double>(row[static_cast<std::size_t>(k)], "engine.initial_x");
      }
      cfg.initial_x.push_back(v);
    }
  } else if (x0) {
    throw ConfigError("engine.initial_x", line_of(x0), "only used with initial_state: explicit");
  }
  es.get("initial_multiplier", cfg.initial_multiplier);
  check(cfg.initial_multiplier >= 0.0, es, "initial_multiplier", "must be >= 0");
  es.finish();

  if (const YAML::Node orc = top.raw("oracle")) {
    Section os(orc, "oracle");
    os.get("method", cfg.oracle.method);
    os.get("resolution", cfg.oracle.resolution);
    os.get("iterations", cfg.oracle.iterations);
    os.get("step_scale", cfg.oracle.step_scale);
    check(cfg.oracle.method == "auto" || cfg.oracle.method == "grid" ||
              cfg.oracle.method == "subgradient",
          os, "method", "must be auto, grid or subgradient");
    check(cfg.oracle.resolution >= 2, os, "resolution", "must be >= 2");
    check(cfg.oracle.step_scale > 0.0, os, "step_scale", "must be > 0");
    os.finish();
  }

  if (const YAML::Node met = top.raw("metrics")) {
    Section ms(met, "metrics");
    const YAML::Node deltas = ms.raw("saturation_deltas");
    if (deltas) {
      if (!deltas.IsSequence() || deltas.size() == 0) {
        throw ConfigError("metrics.saturation_deltas", line_of(deltas),
                          "expected a non-empty list");
      }
      cfg.saturation_deltas.clear();
      for (const auto& d : deltas) {
        const double v = Section::convert<double>(d, "metrics.saturation_deltas");
        if (!(v > 0.0)) {
          throw ConfigError("metrics.saturation_deltas", line_of(d), "must be > 0");
        }
        cfg.saturation_deltas.push_back(v);
      }
    }
    ms.finish();
  }
  top.finish();

  // The problem's sampled horizon is the engine's grid.
  CommonParams& c = common_params(cfg.params);
  c.horizon = cfg.engine.horizon;
  c.step = cfg.engine.step;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", 0, "cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

Scenario build_scenario(const RunConfig& cfg) {
  return make_scenario(cfg.scenario, cfg.params, cfg.seed);
}

Graph build_graph(const RunConfig& cfg) {
  if (!cfg.graph.generator.empty()) {
    return make_graph_from_generator(cfg.graph.generator, cfg.graph.nodes);
  }
  return Graph::build(cfg.graph.nodes, cfg.graph.edges);
}

SystemState build_initial_state(const RunConfig& cfg, const ProblemSpec& p,
                                const Graph& g) {
  SystemState s = initial_state(p, g);
  if (cfg.initial_policy == InitialPolicy::kRandom) {
    Rng rng = substream(cfg.seed, "initial");
    const ActionSet& X = p.action_set;
    const bool box = X.kind() == ActionSet::Kind::kBox;
    const Vec lo = box ? X.lower() : Vec(X.center().array() - X.radius());
    const Vec hi = box ? X.upper() : Vec(X.center().array() + X.radius());
    for (auto& x : s.x) {
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        x[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
      }
      x = p.action_set.project(x);
    }
  } else if (cfg.initial_policy == InitialPolicy::kExplicit) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!p.action_set.contains(cfg.initial_x[i], 1e-12)) {
        throw ConfigError("engine.initial_x", 0,
                          "action of agent " + std::to_string(i) + " is outside the action set");
      }
      s.x[i] = cfg.initial_x[i];
    }
  }
  for (auto& l : s.lambda) l.setConstant(cfg.initial_multiplier);
  for (auto& m : s.mu) std::fill(m.begin(), m.end(), cfg.initial_multiplier);
  return s;
}

}  // namespace dosp::cli
