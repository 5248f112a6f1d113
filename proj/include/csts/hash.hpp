#pragma once

#include <string>
#include <string_view>

namespace csts {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// First 16 hex digits of sha256_hex; used as a short content fingerprint.
std::string fingerprint(std::string_view data);

}  // namespace csts
