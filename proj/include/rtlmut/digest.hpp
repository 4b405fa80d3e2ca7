#pragma once

#include <string>
#include <string_view>

namespace rtlmut {

// SHA-256 hex digest of a byte string. Used to pin pristine workspace state
// and to verify byte-exact rollback.
std::string sha256_hex(std::string_view data);

std::string sha256_file(const std::string& path);

}  // namespace rtlmut
