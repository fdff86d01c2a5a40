#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace upscaler {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws Error(decode_error) on malformed input.
Bytes base64_decode(std::string_view text);

/// 64-bit FNV-1a, for cheap deterministic fingerprints (not for addressing).
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

}  // namespace upscaler
