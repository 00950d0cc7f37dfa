#include "relbench/common/tokenize.hpp"

namespace relbench {

namespace {

bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(unsigned char c) { return (c >= 'a' && c <= 'z') || c >= 0x80; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_word(unsigned char c) { return is_upper(c) || is_lower(c) || is_digit(c); }

}  // namespace

std::vector<std::string> tokenize_terms(std::string_view text) {
  std::vector<std::string> terms;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word(text[j])) ++j;
    // Split the word [i, j) at case boundaries.
    std::size_t start = i;
    for (std::size_t k = i + 1; k <= j; ++k) {
      bool boundary = k == j;
      if (!boundary) {
        unsigned char prev = text[k - 1], cur = text[k];
        bool next_lower = k + 1 < j && is_lower(text[k + 1]);
        // fooBar | HTTPServer (boundary before the S of Server)
        boundary = (is_upper(cur) && (is_lower(prev) || is_digit(prev))) ||
                   (is_upper(cur) && is_upper(prev) && next_lower);
      }
      if (boundary) {
        std::string term(text.substr(start, k - start));
        for (char& c : term) {
          if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
        }
        terms.push_back(std::move(term));
        start = k;
      }
    }
    i = j;
  }
  return terms;
}

}  // namespace relbench
