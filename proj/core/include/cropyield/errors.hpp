#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cropyield {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or layer dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked without the state it depends on (e.g. a backward
// pass without a forward cache).
class StateError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied data violates a precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// A scalar function evaluated to NaN or infinity.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

// A binary file is malformed. Carries the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A checkpoint was written for a different model configuration.
class ConfigMismatchError : public FormatError {
 public:
  ConfigMismatchError(const std::string& what, std::size_t offset) : FormatError(what, offset) {}
};

// A text file (config, spec, CSV) could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cropyield
