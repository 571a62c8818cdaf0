#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vigilkit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed records that do not fit together (gaps, ordering, orphan clicks).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Not enough response times to calibrate the adaptive thresholds.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// A signal-pipeline stage produced an unusable result.
class PipelineError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design matrix is rank deficient.
class SingularFitError : public Error {
 public:
  using Error::Error;
};

}  // namespace vigilkit
