#pragma once

#include <stdexcept>
#include <string>

namespace replikit {

// Raised for malformed inputs and violated preconditions (CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a numerical routine cannot deliver a usable answer (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace replikit
