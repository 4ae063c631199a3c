#include "noisecollage/error.hpp"

namespace noisecollage {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape-error";
    case ErrorKind::kDivision: return "division-error";
    case ErrorKind::kIndex: return "index-error";
    case ErrorKind::kConfig: return "config-error";
    case ErrorKind::kDegenerateRegion: return "degenerate-region";
    case ErrorKind::kMergeConfig: return "merge-config";
    case ErrorKind::kFormat: return "format-error";
    case ErrorKind::kNumericFailure: return "numeric-failure";
    case ErrorKind::kIo: return "io-error";
    case ErrorKind::kSchema: return "schema-error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& message, std::size_t byte_offset)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message + " (at byte " +
                         std::to_string(byte_offset) + ")"),
      kind_(kind),
      byte_offset_(byte_offset) {}

}  // namespace noisecollage
