#pragma once

#include <string>

namespace convexify {

/// Round-trippable decimal text (17 significant digits, '.' separator).
std::string format_double(double v);

}  // namespace convexify
