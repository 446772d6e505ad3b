#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsakt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor extents that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered, or a kernel asked to do something undefined (a fully masked row).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Index or token outside its vocabulary.
class RangeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed interaction log. `line()` is the 1-based line in the input, 0 if not row specific.
class FormatError : public IoError {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : IoError(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class CheckpointError : public IoError {
 public:
  using IoError::IoError;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointShapeError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Metric input with nothing in it.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Metric undefined for the given input, e.g. AUC with a single label class.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsakt
