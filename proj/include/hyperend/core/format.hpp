#pragma once

#include <cstdio>
#include <string>

namespace hyperend {

// Round-trip decimal representation used in every CSV and JSON artifact.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace hyperend
