#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stylefactor {

enum class ErrorKind {
  kIo,
  kParse,
  kValidation,
  kInvalidArgument,
  kNotFound,
  kOutOfRange,
  kVersionMismatch,
  kSchema,
  kDigestMismatch,
};

/// Stable snake_case name used in CLI error lines and HTTP error bodies.
std::string_view ErrorKindName(ErrorKind kind);

/// Single exception type for the library. The kind drives CLI exit codes and
/// HTTP status mapping; the message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stylefactor
