#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace svk::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kNonConvergence = 3, kVerificationFailure = 4 };

const std::vector<std::string>& command_names();

// Runs one subcommand, writing its CSV outputs and <command>_status.csv into
// out_dir, and returns the process exit code.  Human-readable progress goes to log.
int run_command(const std::string& name, const ExperimentConfig& e, const std::string& out_dir, std::ostream& log);

// status file for failures that happen before a command can start (config errors)
void write_status(const std::string& out_dir, const std::string& command, int code, const std::string& message);

}  // namespace svk::cli
