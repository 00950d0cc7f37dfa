#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace relbench {

// Insertion-ordered JSON keeps on-disk key order stable and readable.
using Json = nlohmann::ordered_json;

// Parses one JSON value per non-blank line. Throws Error(kParse) naming the
// offending line number.
std::vector<Json> parse_jsonl(std::string_view text, std::string_view source_name);
std::vector<Json> read_jsonl(const std::string& path);

// One compact JSON object per line, LF-terminated.
std::string to_jsonl(const std::vector<Json>& rows);

// Appends one line and flushes; used by append-only logs.
void append_jsonl_line(const std::string& path, const Json& row);

}  // namespace relbench
