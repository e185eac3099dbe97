#pragma once

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

namespace skqd {

// Shortest decimal form that parses back to the identical double. Every text
// output (CSV, config, reports) goes through this so reruns with the same
// inputs are byte-identical.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  for (int precision = 1; precision < 17; ++precision) {
    std::ostringstream ss;
    ss << std::setprecision(precision) << v;
    if (std::stod(ss.str()) == v) return ss.str();
  }
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace skqd
