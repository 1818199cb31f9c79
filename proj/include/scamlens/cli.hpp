#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scamlens {

/// `args` excludes the program name. Returns 0 on success or a legitimate
/// scan, 2 when scan finds a scam, 1 on any error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scamlens
