#pragma once

#include <string>

namespace phdinf {

/// Fixed 17-significant-digit rendering, enough to round-trip any double.
std::string format_double(double value);

}  // namespace phdinf
