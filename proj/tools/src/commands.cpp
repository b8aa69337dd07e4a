#include "dosp/cli/commands.hpp"

#include <fstream>
#include <map>
#include <iostream>
#include <sstream>

#include <tbb/global_control.h>
#include <tbb/task_arena.h>

#include "dosp/dynamics.hpp"
#include "dosp/metrics.hpp"

namespace dosp::cli {
namespace fs = std::filesystem;

std::string error_line(const std::exception& e) {
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    std::string out = "error: ConfigError: " + c->field();
    if (c->line() > 0) out += " (line " + std::to_string(c->line()) + ")";
    return out + ": " + c->what();
  }
  if (const auto* d = dynamic_cast<const Error*>(&e)) {
    return "error: " + d->kind() + ": " + d->what();
  }
  return std::string("error: Exception: ") + e.what();
}

namespace {

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const ArtifactError*>(&e)) return kExitArtifacts;
  if (dynamic_cast<const InvalidEdge*>(&e) || dynamic_cast<const DisconnectedGraph*>(&e) ||
      dynamic_cast<const ScenarioError*>(&e) || dynamic_cast<const CsvSchemaError*>(&e)) {
    return kExitConfig;
  }
  return kExitRuntime;
}

template <class F>
int guarded(std::ostream& err, std::size_t workers, F&& body) {
  try {
    if (workers == 0) throw ConfigError("--workers", 0, "must be >= 1");
    // Lifts the default cap (hardware threads) so any worker count is honoured.
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism, workers);
    tbb::task_arena arena(static_cast<int>(workers));
    int status = kExitOk;
    arena.execute([&] { status = body(); });
    return status;
  } catch (const std::exception& e) {
    err << error_line(e) << '\n';
    return exit_code(e);
  }
}

fs::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
  if (opts.output_dir) return *opts.output_dir;
  if (cfg.output_dir.empty()) {
    throw ConfigError("output_dir", 0, "no output directory in config or on the command line");
  }
  return cfg.output_dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + p.string());
  out.precision(17);
  return out;
}

OracleContext make_context(const RunConfig& cfg, const ProblemSpec& p, const Graph& g) {
  OracleContext ctx;
  ctx.scenario = cfg.scenario;
  ctx.agents = p.agent_count();
  ctx.diameter = g.diameter();
  ctx.gamma = p.gamma;
  ctx.epsilon = cfg.engine.epsilon;
  ctx.K = p.constants.cost_floor_gap;
  ctx.L0 = p.constants.lipschitz_cost;
  ctx.Lf = p.constants.lipschitz_constraint;
  ctx.horizon = cfg.engine.horizon;
  ctx.step = cfg.engine.step;
  ctx.saturation_delta = cfg.saturation_deltas.front();
  return ctx;
}

std::string vec_text(const Vec& v) {
  std::string s;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) s += ' ';
    s += format_double(v[k]);
  }
  return s;
}

}  // namespace

OracleResult compute_oracle(const RunConfig& cfg, const ProblemSpec& p) {
  std::string method = cfg.oracle.method;
  if (method == "auto") {
    method = p.action_set.kind() == ActionSet::Kind::kBox && p.action_dim() <= 3
                 ? "grid"
                 : "subgradient";
  }
  if (method == "grid") return grid_oracle(p, cfg.oracle.resolution);
  return subgradient_oracle(p, cfg.oracle.iterations, StepSchedule{cfg.oracle.step_scale});
}

void write_oracle_file(const fs::path& path, const OracleResult& r,
                       const OracleContext& ctx) {
  auto out = open_out(path);
  out << "method=" << r.method << '\n'
      << "xstar=" << vec_text(r.xstar) << '\n'
      << "objective_integral=" << format_double(r.objective_integral) << '\n'
      << "worst_violation=" << format_double(r.worst_violation) << '\n'
      << "feasible=" << (r.feasible ? 1 : 0) << '\n'
      << "resolution=" << r.resolution << '\n'
      << "iterations=" << r.iterations << '\n'
      << "penalty_weight=" << format_double(r.penalty_weight) << '\n'
      << "restored=" << (r.restored ? 1 : 0) << '\n'
      << "[context]\n"
      << "scenario=" << ctx.scenario << '\n'
      << "agents=" << ctx.agents << '\n'
      << "diameter=" << ctx.diameter << '\n'
      << "gamma=" << format_double(ctx.gamma) << '\n'
      << "epsilon=" << format_double(ctx.epsilon) << '\n'
      << "K=" << format_double(ctx.K) << '\n'
      << "L0=" << format_double(ctx.L0) << '\n'
      << "Lf=" << format_double(ctx.Lf) << '\n'
      << "horizon=" << format_double(ctx.horizon) << '\n'
      << "step=" << format_double(ctx.step) << '\n'
      << "saturation_delta=" << format_double(ctx.saturation_delta) << '\n';
}

void read_oracle_file(const fs::path& path, OracleResult& r, OracleContext& ctx) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ArtifactError("corrupt line in " + path.string());
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto text = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ArtifactError(path.string() + ": missing key '" + k + "'");
    return it->second;
  };
  auto num = [&](const std::string& k) {
    try {
      return std::stod(text(k));
    } catch (const std::logic_error&) {
      throw ArtifactError(path.string() + ": bad value for '" + k + "'");
    }
  };
  r.method = text("method");
  std::vector<double> xs;
  std::istringstream xin(text("xstar"));
  for (std::string tok; xin >> tok;) {
    try {
      xs.push_back(std::stod(tok));
    } catch (const std::logic_error&) {
      throw ArtifactError(path.string() + ": bad value for 'xstar'");
    }
  }
  r.xstar = Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  r.objective_integral = num("objective_integral");
  r.worst_violation = num("worst_violation");
  r.feasible = num("feasible") != 0.0;
  r.resolution = static_cast<std::size_t>(num("resolution"));
  r.iterations = static_cast<std::size_t>(num("iterations"));
  r.penalty_weight = num("penalty_weight");
  r.restored = num("restored") != 0.0;
  ctx.scenario = text("scenario");
  ctx.agents = static_cast<std::size_t>(num("agents"));
  ctx.diameter = static_cast<std::size_t>(num("diameter"));
  ctx.gamma = num("gamma");
  ctx.epsilon = num("epsilon");
  ctx.K = num("K");
  ctx.L0 = num("L0");
  ctx.Lf = num("Lf");
  ctx.horizon = num("horizon");
  ctx.step = num("step");
  ctx.saturation_delta = num("saturation_delta");
}

int cmd_run(const fs::path& config, const CommandOptions& opts, std::ostream& out,
            std::ostream& err) {
  return guarded(err, opts.workers, [&] {
    RunConfig cfg = load_config(config);
    const fs::path dir = output_dir(cfg, opts);
    Scenario sc = build_scenario(cfg);
    const ProblemSpec& p = sc.problem;
    const Graph g = build_graph(cfg);
    EngineConfig engine = cfg.engine;
    engine.workers = opts.workers;
    engine.initial_state = build_initial_state(cfg, p, g);

    std::vector<std::string> warnings;
    if (engine.epsilon <= 0.5) {
      warnings.push_back("epsilon <= 1/2: the own-fit bound needs epsilon > 1/2");
    }
    if (cfg.initial_multiplier > 0.0) {
      warnings.push_back(
          "initial multipliers are nonzero: disagreement and regret bounds do not apply");
    }
    const WitnessCheck w = check_witness(p);
    if (!w.present) {
      warnings.push_back("scenario has no feasibility witness");
    } else if (!w.strictly_feasible) {
      warnings.push_back("feasibility witness is not strictly feasible on the sampled horizon "
                         "(worst " + format_double(w.worst) + ")");
    }

    const OracleResult oracle = compute_oracle(cfg, p);
    if (!oracle.feasible) {
      warnings.push_back("oracle point violates the sampled constraints (worst " +
                         format_double(oracle.worst_violation) + ")");
    }

    RunOptions ro;
    ro.metrics.saturation_deltas = cfg.saturation_deltas;
    ro.benchmark = oracle.xstar;
    const TrajectoryLog log = run(p, g, engine, ro);

    std::vector<ExtraColumn> extra;
    if (!sc.holdout.empty()) {
      auto holdout = std::make_shared<const std::vector<LabeledSample>>(sc.holdout);
      for (std::size_t i = 0; i < p.agent_count(); ++i) {
        extra.push_back({"heldout_err_" + std::to_string(i),
                         [holdout, i](const LogSample& s) {
                           return classification_error(s.state.x[i], *holdout);
                         }});
      }
    }

    fs::create_directories(dir);
    {
      auto f = open_out(dir / "trajectory.csv");
      write_trajectory_csv(log, g, f);
    }
    {
      auto f = open_out(dir / "metrics.csv");
      write_metrics_csv(log, f, extra);
    }
    write_oracle_file(dir / "oracle.out", oracle, make_context(cfg, p, g));
    {
      auto f = open_out(dir / "warnings.txt");
      for (const auto& msg : warnings) f << msg << '\n';
    }
    const std::string report = render_report(dir);
    {
      auto f = open_out(dir / "bounds.txt");
      f << report;
    }
    if (!opts.quiet) {
      for (const auto& msg : warnings) err << "warning: " << msg << '\n';
      out << report;
    }
    return kExitOk;
  });
}

int cmd_oracle(const fs::path& config, const CommandOptions& opts, std::ostream& out,
               std::ostream& err) {
  return guarded(err, opts.workers, [&] {
    RunConfig cfg = load_config(config);
    const fs::path dir = output_dir(cfg, opts);
    Scenario sc = build_scenario(cfg);
    const Graph g = build_graph(cfg);
    const OracleResult r = compute_oracle(cfg, sc.problem);
    fs::create_directories(dir);
    write_oracle_file(dir / "oracle.out", r, make_context(cfg, sc.problem, g));
    if (!opts.quiet) {
      out << "method=" << r.method << " xstar=" << vec_text(r.xstar)
          << " objective_integral=" << format_double(r.objective_integral)
          << " worst_violation=" << format_double(r.worst_violation) << '\n';
    }
    return kExitOk;
  });
}

int cmd_report(const fs::path& run_dir, const CommandOptions& opts, std::ostream& out,
               std::ostream& err) {
  return guarded(err, opts.workers, [&] {
    const std::string report = render_report(run_dir);
    if (!opts.quiet) out << report;
    return kExitOk;
  });
}

}  // namespace dosp::cli
