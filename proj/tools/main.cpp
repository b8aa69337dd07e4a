#include <iostream>

#include <CLI11.hpp>

#include "dosp/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed online saddle-point simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  dosp::cli::CommandOptions opts;
  app.add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", opts.quiet, "Suppress console output");

  std::string path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Simulate a config and write all artifacts");
  run->add_option("config", path)->required();
  run->add_option("--output", out_dir, "Override output_dir");
  auto* oracle = app.add_subcommand("oracle", "Compute only the offline benchmark");
  oracle->add_option("config", path)->required();
  oracle->add_option("--output", out_dir, "Override output_dir");
  auto* report = app.add_subcommand("report", "Recompute the bound report from a run directory");
  report->add_option("dir", path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: UsageError: " << e.what() << '\n';
    return dosp::cli::kExitConfig;
  }
  if (!out_dir.empty()) opts.output_dir = out_dir;

  if (run->parsed()) return dosp::cli::cmd_run(path, opts, std::cout, std::cerr);
  if (oracle->parsed()) return dosp::cli::cmd_oracle(path, opts, std::cout, std::cerr);
  return dosp::cli::cmd_report(path, opts, std::cout, std::cerr);
}
