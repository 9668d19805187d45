#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace surfdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (t < 1 for H, n = 0 for an average, s > r for a norm, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A stated hypothesis of an operation does not hold.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// An orbit left a box domain (or the sqrt(d)-ball of a map sequence).
class EscapeError : public Error {
  public:
    EscapeError(std::size_t index, const std::string& what)
        : Error(what + " (first escaping index " + std::to_string(index) + ")"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

/// A construction needed more pieces than its calibrated budget allows.
class BudgetError : public Error {
  public:
    using Error::Error;
};

/// The derivative of an iterated curve vanished where a ratio needs it.
class DegenerateTangencyError : public Error {
  public:
    DegenerateTangencyError(std::size_t step, const std::string& what)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

/// A configuration document failed validation.
class SchemaError : public Error {
  public:
    using Error::Error;
};

}  // namespace surfdyn
