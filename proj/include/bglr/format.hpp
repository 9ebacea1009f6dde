#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace bglr {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

}  // namespace bglr
