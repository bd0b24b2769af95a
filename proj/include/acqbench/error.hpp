#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acqbench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data (files, annotations, corpora) is malformed or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A JSON document does not match the annotation/detection schema.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// An encoded stream could not be decoded. `offset()` is the byte position
/// at which the problem was detected.
class DecodeError : public DataError {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : DataError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset),
        detail_(what) {}

  std::size_t offset() const noexcept { return offset_; }
  /// Message without the position suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t offset_;
  std::string detail_;
};

}  // namespace acqbench
