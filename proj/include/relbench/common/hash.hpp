#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relbench {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// SHA-256 over the parts joined by NUL bytes, so ("ab","c") and ("a","bc") differ.
std::string sha256_fields(const std::vector<std::string_view>& parts);

}  // namespace relbench
