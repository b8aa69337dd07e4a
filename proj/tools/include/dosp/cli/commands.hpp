#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dosp/cli/config.hpp"
#include "dosp/oracle.hpp"

namespace dosp::cli {

// Missing or corrupt file in a run directory.
class ArtifactError : public Error {
 public:
  explicit ArtifactError(const std::string& what) : Error("ArtifactError", what) {}
};

struct CommandOptions {
  std::size_t workers = 1;
  bool quiet = false;
  std::optional<std::filesystem::path> output_dir;  // overrides the config
};

// Exit statuses.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitArtifacts = 4;

// Each command prints a single "error: <kind>: ..." line to `err` on failure.
int cmd_run(const std::filesystem::path& config, const CommandOptions& opts,
            std::ostream& out, std::ostream& err);
int cmd_oracle(const std::filesystem::path& config, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& run_dir, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);

// Machine-parsable error line for an exception.
std::string error_line(const std::exception& e);

// Bound constants stored next to the oracle result.
struct OracleContext {
  std::string scenario;
  std::size_t agents = 0;
  std::size_t diameter = 0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double K = 0.0;
  double L0 = 0.0;
  double Lf = 0.0;
  double horizon = 0.0;
  double step = 0.0;
  double saturation_delta = 0.0;
};

// oracle.out: key=value lines, then a "[context]" section.
void write_oracle_file(const std::filesystem::path& path, const OracleResult& r,
                       const OracleContext& ctx);
void read_oracle_file(const std::filesystem::path& path, OracleResult& r,
                      OracleContext& ctx);

OracleResult compute_oracle(const RunConfig& cfg, const ProblemSpec& p);

// Builds bounds.txt from the files of a run directory only.
std::string render_report(const std::filesystem::path& run_dir);

}  // namespace dosp::cli
