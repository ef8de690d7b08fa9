#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include "osir/error.hpp"

namespace osir::detail {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    fail(where + ": bad numeric field '" + tok + "'");
  return v;
}

}  // namespace osir::detail
