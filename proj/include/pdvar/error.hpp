#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdvar {

// Input that violates a documented contract. The CLI maps this family to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistic was requested over a sample with no members.
class EmptySampleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A conditional probability or ratio would divide by zero.
class DegenerateDenominatorError : public ValidationError {
 public:
  DegenerateDenominatorError(std::string denominator, const std::string& what)
      : ValidationError(what), denominator_(std::move(denominator)) {}
  const std::string& denominator() const noexcept { return denominator_; }

 private:
  std::string denominator_;
};

// Malformed CSV input. `row` counts physical records with the header as row 1.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, std::string field, const std::string& detail)
      : ValidationError("row " + std::to_string(row) + ", field '" + field + "': " + detail),
        row_(row),
        field_(std::move(field)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

// File could not be read or written. Exit status 2 in the CLI.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdvar
