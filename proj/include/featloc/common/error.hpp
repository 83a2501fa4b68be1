#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace featloc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad inputs or malformed data. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The inputs were well-formed but the numerics could not produce an answer.
/// The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DegenerateGeometry : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EstimationFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AmbiguousCheirality : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateWeights : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace featloc
