#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace arrival {

// Bad inputs: malformed files, broken invariants, invalid configuration.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown at run time: singular factorizations, overflow, ...
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

template <class... Ts>
std::string cat(const Ts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

// Warnings go to stderr; callers that need counts keep their own tallies.
void warn(const std::string& message);

}  // namespace arrival
