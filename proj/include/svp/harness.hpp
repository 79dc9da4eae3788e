#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"

#include "svp/config.hpp"

namespace svp {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitNonConvergence = 3 };

struct RunOptions {
  std::optional<std::string> out_dir;
  bool refine = false;                // forces the h/2 repeat
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::set<std::string> only_kinds;   // empty: all tasks
  bool write_files = true;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  nlohmann::ordered_json report;
  std::map<std::string, std::string> files;  // file name -> content
  std::string directory;
};

/// Output directory: explicit option, then the config, then $SVP_LAB_OUT,
/// then "svp-lab-out".
std::string resolve_output_directory(const RunConfig& cfg, const RunOptions& options);

/// Runs every task and writes the report files. Config problems found at run
/// time (bad stations, wrong lateral data for a form) yield exit code 2.
RunOutcome run(const RunConfig& cfg, const RunOptions& options = {});

/// Loads and runs a config file; all errors become exit codes with a message.
RunOutcome run_file(const std::string& path, const RunOptions& options = {});

/// Structure suite for the config operator (or the default p = 2 operator).
RunOutcome run_structure(const std::optional<std::string>& config_path, std::size_t samples, std::uint64_t seed,
                         const RunOptions& options = {});

}  // namespace svp
