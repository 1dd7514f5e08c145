#pragma once

#include <stdexcept>
#include <string>

namespace pairrank {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (non-finite difference, probability outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An experiment or graph specification cannot be satisfied.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A randomized construction did not produce a valid sample within its retry cap.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV files, counts, standings).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A linear system is singular or a solver failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pairrank
