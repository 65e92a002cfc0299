#pragma once

#include <string>

namespace apc {

// Shortest decimal string that parses back to exactly the same double.
// Non-finite values are written as "inf", "-inf" and "nan".
std::string format_double(double value);

}  // namespace apc
