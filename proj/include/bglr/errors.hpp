#pragma once

#include <stdexcept>
#include <string>

namespace bglr {

/// Argument outside the mathematical domain of a function (e.g. digamma at x <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An estimator could not produce parameters for the supplied data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based row and column when known (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    if (row == 0) return what;
    std::string out = "row " + std::to_string(row);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t row_;
  std::size_t column_;
};

/// Usage errors raised by CLI commands (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bglr

namespace bglr {

/// A sampler could not start: the initial point has zero posterior density or the data are degenerate.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bglr
