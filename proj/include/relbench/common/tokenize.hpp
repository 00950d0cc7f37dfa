#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relbench {

// Code-aware term tokenizer shared by the sparse index and corpus statistics.
// Lowercases ASCII, splits on anything that is not a letter or digit
// (so snake_case splits at '_'), and splits camelCase / PascalCase words:
// "parseHTTPResponse2xx" -> parse, http, response2xx. Bytes >= 0x80 count as
// letters so non-ASCII identifiers survive intact.
std::vector<std::string> tokenize_terms(std::string_view text);

}  // namespace relbench
