#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hyperboloidal/config.hpp"
#include "hyperboloidal/report.hpp"

namespace hyp {

enum class Command { solve, verify, identities, convergence };

Command parse_command(const std::string& s);
std::string to_string(Command c);

enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitSolverError = 2, kExitConfigError = 3 };

struct CliOptions {
  Command command = Command::solve;
  std::string config_path;
  std::string out_dir;
  std::optional<int> grid_n;
  std::optional<std::string> mode;
};

/// Loads, overrides and validates the config. Throws ConfigError.
RunConfig resolve_config(const CliOptions& opts);

/// Runs one command and writes its artifacts into opts.out_dir:
///   solve        report.json, profile.csv (radial) or fields.vtk (ball3d, when enabled)
///   verify       as solve, plus seed identities, fault injection and the perturbation probe
///   identities   report.json
///   convergence  report.json and rates.csv
/// Config errors write nothing. One summary line per check goes to `log`.
int run_command(const CliOptions& opts, std::ostream& log);

struct RunOutput {
  int exit_code = kExitPass;
  Json report;
  /// Extra artifacts as (file name, content), written before report.json.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Runs a command on a validated config without touching the filesystem. Solver and domain
/// errors are caught and recorded in the report with exit code 2.
RunOutput execute(Command command, const RunConfig& cfg, std::ostream& log);

}  // namespace hyp
