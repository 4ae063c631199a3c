#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace noisecollage {

enum class ErrorKind {
  kShape,
  kDivision,
  kIndex,
  kConfig,
  kDegenerateRegion,
  kMergeConfig,
  kFormat,
  kNumericFailure,
  kIo,
  kSchema,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the engine. The kind lets callers (the CLI in
// particular) map errors to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, const std::string& message, std::size_t byte_offset);

  ErrorKind kind() const noexcept { return kind_; }
  // Set for format errors raised while decoding binary files.
  std::optional<std::size_t> byte_offset() const noexcept { return byte_offset_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> byte_offset_;
};

}  // namespace noisecollage
