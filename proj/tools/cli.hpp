#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kron::cli {

/// Runs the command line front end. Exit codes: 0 success, 1 domain error
/// (e.g. invalid ensemble, E0 outside the bulk), 2 input error (malformed
/// files or options), 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kron::cli
