#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rmprod/cli/config.hpp"

namespace rmprod::cli {

/// Parses `command [flags]` (no program name). A --config file is read
/// first and every flag given on the command line overrides it. The result
/// is validated; throws ConfigError (or a named subclass) otherwise.
ExperimentConfig parse_args(const std::vector<std::string>& args);

/// Whole tool: parse, execute, write outputs. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rmprod::cli
