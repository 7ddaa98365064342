#include "stylefactor/error.hpp"

namespace stylefactor {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kOutOfRange: return "out_of_range";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kDigestMismatch: return "digest_mismatch";
  }
  return "unknown";
}

}  // namespace stylefactor
