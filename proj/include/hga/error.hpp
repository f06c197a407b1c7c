#pragma once

#include <stdexcept>
#include <string>

namespace hga {

// Base for all library failures; the CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when a tensor op produces NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hga
