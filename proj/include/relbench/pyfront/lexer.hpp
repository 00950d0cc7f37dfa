#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relbench::py {

// Raised for any lexical or grammatical error; carries a 1-based line.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class TokenKind { kName, kNumber, kString, kOp, kNewline, kIndent, kDedent, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;  // source text (strings: the whole literal, prefix included)
  int line = 0;
  int col = 0;
  int end_line = 0;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;

  // String literals only.
  std::string prefix;  // lowercased, e.g. "rb"
  std::string body;    // between the quotes, undecoded
};

// Tokenizes Python 3 source, producing NEWLINE/INDENT/DEDENT the way the
// reference tokenizer does: blank and comment-only lines are dropped and
// newlines inside brackets are ignored.
std::vector<Token> tokenize(std::string_view source);

// Decodes backslash escapes of a non-raw string body.
std::string decode_string_body(std::string_view body, bool raw);

}  // namespace relbench::py
