#pragma once

#include <stdexcept>
#include <string>

namespace livediff {

enum class ErrorKind {
  MalformedFile,
  UnsupportedFormat,
  InvalidDimensions,
  InvalidConfig,
  InsufficientSamples,
  DimensionMismatch,
  SingleClass,
  MissingClass,
  ParseError,
  MissingFile,
  DuplicateId,
  MissingDeepFeature,
  VersionMismatch,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying
/// its kind, so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace livediff
