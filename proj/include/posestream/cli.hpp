#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace posestream {

/// Entry point of the `posestream` tool. Subcommands: synth, preprocess,
/// train, eval, fuse, weights-search. Returns the process exit code; on
/// failure a one-line JSON object {"command", "error", ...} goes to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace posestream
