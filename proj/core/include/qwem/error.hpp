#pragma once

#include <stdexcept>
#include <string>

namespace qwem {

// Usage errors map to CLI exit code 1, data errors to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qwem
