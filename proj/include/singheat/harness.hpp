#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "singheat/config.hpp"

namespace singheat {

struct RunOptions {
  bool allow_inconclusive = false;
  std::string output_dir;  // non-empty: overrides the config and the environment
};

struct RunSummary {
  int status = 0;  // 0: clean, 1: failures, or inconclusive verdicts without allow_inconclusive
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t inconclusive = 0;
  std::string output_dir;           // directory holding this run's files
  std::vector<std::string> files;   // relative to output_dir, in write order
  std::vector<std::string> lines;   // human-readable report
};

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "SINGHEAT_OUTPUT_DIR";

/// classify, scan, capacity, psi, solve, reduce, kernel, trace, validate
const std::vector<std::string>& subcommand_names();

/// Base output directory: opts.output_dir, else $SINGHEAT_OUTPUT_DIR, else the config value.
std::string resolve_output_dir(const ExperimentConfig& cfg, const RunOptions& opts);

/// Runs one subcommand and writes its CSV files plus manifest.json into <base>/<subcommand>/.
/// Unknown subcommands throw ConfigError before anything is written. Numerical failures that
/// prevent a result propagate as NumericalError or DomainError.
RunSummary run_subcommand(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace singheat
