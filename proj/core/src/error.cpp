#include "upscaler/error.hpp"

namespace upscaler {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::decode_error: return "decode-error";
    case ErrorCode::validation_error: return "validation-error";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::precondition_failed: return "precondition-failed";
    case ErrorCode::transport_error: return "transport-error";
    case ErrorCode::request_error: return "request-error";
    case ErrorCode::protocol_error: return "protocol-error";
    case ErrorCode::admission_rejected: return "admission-rejected";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::vector<std::string> details)
    : std::runtime_error(message), code_(code), details_(std::move(details)) {}

void throw_error(ErrorCode code, const std::string& message, std::vector<std::string> details) {
  throw Error(code, message, std::move(details));
}

}  // namespace upscaler
