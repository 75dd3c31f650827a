#pragma once

#include <iosfwd>

#include "cdet/error.hpp"
#include "cdet/log.hpp"
#include "cdet/pipeline.hpp"

namespace cdet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInput = 2;

/// InvalidConfig maps to kExitConfig; every other error code is an input problem.
int exit_code_for(const Error& error);

// Each command writes its result to config.output (atomically, via a temporary file)
// or to `out` when no output path is set, and returns an exit code. Errors are logged,
// never thrown.
int cmd_detect(const RunConfig& config, Logger& log, std::ostream& out);
int cmd_market(const RunConfig& config, Logger& log, std::ostream& out);
/// Writes the stream to config.output and the ground truth to config.truth, which
/// defaults to "<output>.truth.json".
int cmd_synth(const RunConfig& config, Logger& log, std::ostream& out);
int cmd_evaluate(const RunConfig& config, Logger& log, std::ostream& out);

/// Writes `content` to `path` through a sibling temporary file. Throws Error{Io}.
void write_file_atomic(const std::string& path, std::string_view content);

} // namespace cdet
