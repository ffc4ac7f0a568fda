#pragma once

#include <string>

namespace psnf {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace psnf
