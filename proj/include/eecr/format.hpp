#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace eecr {

/// Fixed 10-significant-digit rendering used in every CSV the tools emit.
inline std::string fmt_num(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace eecr
