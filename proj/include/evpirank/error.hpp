#pragma once

#include <stdexcept>
#include <string>

namespace evpirank {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input (bad JSON line, wrong embedding width, bad header...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Tensor or vector shapes that do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Loss or gradient became NaN/inf during training or checking.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad caller arguments (unknown doc id, empty label set, unknown config key).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace evpirank
