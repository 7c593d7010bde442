#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dialect::cli {

/// Runs one command. `args` excludes the program name. Returns the exit
/// status: 0 on success, 1 on a runtime error, 2 on a usage error.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& command_names();

}  // namespace dialect::cli
