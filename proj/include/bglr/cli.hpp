#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bglr::cli {

/// Exit codes: 0 success, 1 numeric, input or output failure, 2 usage error.
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bglr::cli
