#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relbench::corpus {

enum class Dialect { kC, kGo, kJava, kJavaScript };

struct ScanError : std::runtime_error {
  ScanError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message) {}
};

enum class TokKind { kIdent, kNumber, kString, kPunct, kComment, kPreproc };

struct Tok {
  TokKind kind;
  std::string_view text;
  std::size_t begin;
  std::size_t end;
  int line;
  int end_line;
};

// Token stream for one file. `code` holds the significant tokens (no
// comments or preprocessor lines); `all` keeps everything for doc pairing.
struct Scan {
  std::vector<Tok> all;
  std::vector<std::size_t> code;   // indices into `all`
  std::vector<std::size_t> match;  // for brackets in `code`: index of the partner; npos otherwise

  const Tok& at(std::size_t i) const { return all[code[i]]; }
  std::size_t size() const { return code.size(); }
  bool is(std::size_t i, std::string_view text) const {
    return i < code.size() && at(i).kind == TokKind::kPunct && at(i).text == text;
  }
  bool is_ident(std::size_t i, std::string_view text = {}) const {
    return i < code.size() && at(i).kind == TokKind::kIdent && (text.empty() || at(i).text == text);
  }
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Throws ScanError on unterminated block comments, template or raw strings,
// and unbalanced brackets.
Scan scan(std::string_view source, Dialect dialect);

// Doc comment for the declaration starting at code token `first`: the
// contiguous comments directly above it (no blank line in between), with
// comment delimiters removed. Empty when there is none.
std::string leading_doc(const Scan& s, std::size_t first);

// Strips // and /* */ delimiters and leading `*` gutters from one comment.
std::string strip_comment(std::string_view comment);

}  // namespace relbench::corpus
