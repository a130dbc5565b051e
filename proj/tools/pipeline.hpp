#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "linkvar/error.hpp"

namespace linkvar::tools {

enum ExitCode : int { kOk = 0, kValidation = 2, kSolver = 3, kGeometry = 4 };

int exit_code_for(ErrorKind kind);

const std::vector<std::string>& subcommands();

struct Outcome {
  int exit_code = kOk;
  nlohmann::json report;
};

/// Runs one subcommand and writes <out_dir>/<subcommand>.json plus any CSV or
/// snapshot outputs. Never throws on library errors; they land in the report.
/// Progress lines go to `log` when it is non-null.
Outcome run_subcommand(const std::string& subcommand, const RunConfig& cfg,
                       const std::string& out_dir, std::ostream* log = nullptr);

/// Report for a run that failed before the pipeline started (bad config).
void write_error_report(const std::string& out_dir, const std::string& subcommand, const Error& e);

}  // namespace linkvar::tools
