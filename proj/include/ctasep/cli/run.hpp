#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctasep/cli/config.hpp"

namespace ctasep::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeFailure = 3, kCheckFailure = 4 };

struct RunOutcome {
  int exit_code = kOk;
  std::filesystem::path directory;
  std::vector<std::string> files;  // CSV and SVG names inside directory
  std::string error;
};

/// Runs one subcommand and writes its CSV files, plots and manifest.
RunOutcome run(const RunConfig& config, std::ostream& log);

/// Small fixed acceptance subset; exit code 4 when a check fails.
int self_test(std::ostream& log);

/// Entry point of the command line tool.
int main_entry(int argc, char** argv);

}  // namespace ctasep::cli
