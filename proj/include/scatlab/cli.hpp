#pragma once
// Command-line front end shared by the scatlab executable and the tests.

#include <iosfwd>
#include <string>
#include <vector>

namespace scatlab {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on success,
/// 1 on a contract or validation error, 2 on an I/O error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace scatlab
