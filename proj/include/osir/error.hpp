#pragma once

#include <stdexcept>
#include <string>

namespace osir {

// Single error type for the whole library. The CLI layer catches it and
// turns it into a nonzero exit with an "osir: error:" prefix.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void check(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

}  // namespace osir
