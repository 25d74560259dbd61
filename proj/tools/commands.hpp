#pragma once
// bowen-press command dispatch. Exit codes: 0 ok, 1 failed proven check (verify), 2 config error,
// 3 divergent pressure, 4 delta bracket left ambiguous beyond the tolerance.

#include <ostream>

#include "report.hpp"
#include "run_config.hpp"

namespace bowen::cli {

struct CommandResult {
  int exit_code = 0;
  Report report;
};

CommandResult cmd_pressure(const RunConfig& cfg);
CommandResult cmd_curve(const RunConfig& cfg);
CommandResult cmd_delta(const RunConfig& cfg);
CommandResult cmd_repeller(const RunConfig& cfg);
CommandResult cmd_gps(const RunConfig& cfg);
CommandResult cmd_verify(const RunConfig& cfg);

CommandResult run_command(const RunConfig& cfg);

/// Full front end: parse, run, write the report (to --output or out). Diagnostics go to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bowen::cli
