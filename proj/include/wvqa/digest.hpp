#pragma once

#include <string>
#include <string_view>

namespace wvqa {

/// Hex-encoded SHA-256 of the given bytes.
std::string sha256_hex(std::string_view data);

/// Base64 encode (standard alphabet, padded); used for image attachments.
std::string base64_encode(std::string_view data);

}  // namespace wvqa
