#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shapelab::cli {

// Exit status: 0 success, 2 validation error (no outputs written), 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace shapelab::cli
