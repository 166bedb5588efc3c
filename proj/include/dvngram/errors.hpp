#pragma once

#include <stdexcept>
#include <string>

namespace dvngram {

/// Input data is missing, malformed or unusable (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite parameters were detected (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dvngram
