#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or configuration parameter is out of its domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid input (mismatched traces, empty observation sets, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A deviation ratio falls outside the selected regime.
class InvalidDeviation : public Error {
 public:
  InvalidDeviation(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Raised when two independent computations that must agree do not.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdc
