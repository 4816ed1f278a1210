#pragma once

#include <stdexcept>
#include <string>

namespace mbl {

/// Base class; exit_code() is what the CLI returns when this escapes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

/// Precondition on arguments violated.
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

/// Operation needs qubit sites but got something else.
class UnsupportedDimensionError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

/// Dimension or memory cap exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

/// Not enough samples to resolve a quadrature or fit.
class ResolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mbl
