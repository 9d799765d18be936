#pragma once

#include <stdexcept>
#include <string>

namespace reasoner {

// Base for every domain failure raised by the library. `name()` is the
// short error class printed by the CLI.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept = 0;
};

// Invalid scalar argument (alpha outside [0,1], n = 0, sigma <= 0, ...).
class ParameterError : public Error {
public:
  using Error::Error;
  const char* name() const noexcept override { return "ParameterError"; }
};

// Vector dimensions disagree.
class ShapeError : public Error {
public:
  using Error::Error;
  const char* name() const noexcept override { return "ShapeError"; }
};

// Input data is empty or unusable.
class DataError : public Error {
public:
  using Error::Error;
  const char* name() const noexcept override { return "DataError"; }
};

// Operation invoked on an object in the wrong state.
class StateError : public Error {
public:
  using Error::Error;
  const char* name() const noexcept override { return "StateError"; }
};

}  // namespace reasoner
