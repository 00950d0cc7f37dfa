#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace relbench {

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view in);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Number of lines in `s`: 0 for empty text, otherwise '\n' count + 1
// (a trailing newline does not open a new line).
std::int64_t count_lines(std::string_view s);

// Reads a whole file; throws Error(kIo) when it cannot be opened.
std::string read_file(const std::string& path);

// Writes via a temporary sibling and renames, so a failed write leaves no partial
// file. Missing parent directories are created.
void write_file_atomic(const std::string& path, std::string_view contents);

// Fixed-point decimal rendering with `decimals` digits, rounding half away from zero.
std::string format_fixed(double value, int decimals);

// Rounds `value` to `decimals` digits, half away from zero.
double round_to(double value, int decimals);

}  // namespace relbench
