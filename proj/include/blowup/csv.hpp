#pragma once

#include <cstdio>
#include <string>

namespace blowup {

/// Shortest round-trip-lossless decimal form (17 significant digits).
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace blowup
