#pragma once

#include <charconv>
#include <string>

namespace nsgld {

// Shortest round-trip decimal representation (std::to_chars); CSV cells are
// written through this so re-parsing reproduces the exact double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace nsgld
