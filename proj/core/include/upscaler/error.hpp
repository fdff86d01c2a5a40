#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace upscaler {

enum class ErrorCode {
  invalid_argument,
  decode_error,
  validation_error,
  config_error,
  parse_error,
  not_found,
  precondition_failed,
  transport_error,
  request_error,
  protocol_error,
  admission_rejected,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a stable machine-readable code.
// `details` holds per-field findings for validation and config errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

[[noreturn]] void throw_error(ErrorCode code, const std::string& message,
                              std::vector<std::string> details = {});

}  // namespace upscaler
