#pragma once

#include <cerrno>
#include <cstdlib>
#include <optional>
#include <string>

namespace relbench::transpile {

// Value of a Python integer literal (any base, underscores allowed) when it
// fits in a signed 64-bit C long.
inline std::optional<long long> int_literal_value(const std::string& text) {
  std::string digits;
  for (char c : text) {
    if (c != '_') digits.push_back(c);
  }
  int base = 10;
  std::size_t skip = 0;
  if (digits.size() > 1 && digits[0] == '0') {
    char p = static_cast<char>(digits[1] | 0x20);
    if (p == 'x') base = 16, skip = 2;
    if (p == 'o') base = 8, skip = 2;
    if (p == 'b') base = 2, skip = 2;
  }
  errno = 0;
  char* end = nullptr;
  const char* begin = digits.c_str() + skip;
  unsigned long long v = std::strtoull(begin, &end, base);
  if (errno != 0 || end == begin || *end != '\0' || v > 0x7fffffffffffffffULL) return std::nullopt;
  return static_cast<long long>(v);
}

}  // namespace relbench::transpile
