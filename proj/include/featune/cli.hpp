#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace featune::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 1;
inline constexpr int exit_failure = 2;

/// Environment variable naming the default output directory.
inline constexpr char const* output_dir_variable = "FEATUNE_OUTPUT_DIR";

/// Runs the command line `args` (without the program name). Verbs: tune,
/// eval, report, oracle. Returns 0 on success, 1 on invalid input and 2 on
/// runtime failure (including a failed oracle check).
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

} // namespace featune::cli
