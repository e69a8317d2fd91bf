#pragma once

#include <stdexcept>
#include <string>

namespace lizard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad call arguments or configuration (CLI exit code 2).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerically undefined result, e.g. correlation of a constant vector
// (CLI exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lizard
