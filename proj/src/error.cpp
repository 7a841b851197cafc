#include "livediff/error.hpp"

namespace livediff {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::InvalidDimensions: return "InvalidDimensions";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::MissingClass: return "MissingClass";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::MissingDeepFeature: return "MissingDeepFeature";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace livediff
