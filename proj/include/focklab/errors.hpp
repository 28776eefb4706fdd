#pragma once

#include <stdexcept>
#include <string>

namespace focklab {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integral that has to be finite was certified divergent.
class DivergentError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented constraint (bad parameter, bad symbol spec).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed symbol specification; `path()` names the offending key.
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)), message_(what) {}
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string path_;
  std::string message_;
};

/// Two annulus supports overlap.
class DisjointnessViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Quadrature or series refinement did not reach the requested accuracy.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

class TruncationFailure : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class FitRejected : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class PlacementFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace focklab
