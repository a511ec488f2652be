#pragma once

#include <stdexcept>
#include <string>

namespace drift {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (log of a
// non-positive value, probability outside (0,1), y outside a bounded flow).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Root search could not enclose the target.
class BracketError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch, int batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

// Malformed or inconsistent model/config description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data problems: missing columns, unparseable cells, incompatible
// outcomes.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(const std::string& column)
      : DataError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

}  // namespace drift
