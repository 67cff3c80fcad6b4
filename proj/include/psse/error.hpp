#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psse {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
  public:
    ParseError(std::string const& message, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
    explicit ParseError(std::string const& message) : Error(message) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_ = 0;
};

/// Structurally well-formed input that violates a model invariant.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Dataset / checkpoint file that does not match its own header.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Bad user configuration (negative sigma, invalid hyperparameters, ...).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Meter placed on a bus or branch that does not exist.
class SelectionError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// Dimension or shape disagreement between operands.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Numerical failure: divergence, singular systems, non-finite values.
class NumericalError : public Error {
  public:
    using Error::Error;
};

class NoConvergenceError : public NumericalError {
  public:
    NoConvergenceError(std::string const& message, double final_mismatch)
        : NumericalError(message), final_mismatch_(final_mismatch) {}

    double final_mismatch() const noexcept { return final_mismatch_; }

  private:
    double final_mismatch_;
};

/// Normal matrix too badly conditioned to factor.
class IllPosedError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Misuse of an API (e.g. backward through a node from another tape).
class UsageError : public Error {
  public:
    using Error::Error;
};

}  // namespace psse
