#pragma once

#include <iosfwd>

#include "cyf/cli/config.hpp"

namespace cyf::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNotConverged = 3, kMonitorViolation = 4 };

/// Runs one configured job, writing summary.json (always, for codes 0/3/4),
/// config.json and the mode's traces and fields into config.output_dir.
/// Progress goes to `log` unless it is null.
int execute(const RunConfig& config, std::ostream* log = nullptr);

/// trace.csv contents for a flow trace.
void write_trace_csv(std::ostream& out, const FlowTrace& trace);

}  // namespace cyf::cli
