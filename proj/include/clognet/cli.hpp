#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clognet::cli {

/// Runs one CLI command. Exit status: 0 = ok/SAFE, 2 = UNSAFE, 1 = error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace clognet::cli
