#pragma once

#include <string>
#include <string_view>

namespace llata {

/// Hex-encoded SHA-256 digest. Used for cache keys, not for security.
std::string sha256_hex(std::string_view data);

}  // namespace llata
