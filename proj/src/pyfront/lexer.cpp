#include "relbench/pyfront/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>

namespace relbench::py {
namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool valid_string_prefix(std::string p) {
  std::transform(p.begin(), p.end(), p.begin(), [](unsigned char c) { return std::tolower(c); });
  static constexpr std::array<std::string_view, 9> kPrefixes = {
      "", "r", "u", "f", "b", "br", "rb", "fr", "rf"};
  return std::find(kPrefixes.begin(), kPrefixes.end(), p) != kPrefixes.end();
}

constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ".",  ";",  "="};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    indents_.push_back(0);
    alt_indents_.push_back(0);
    while (pos_ < src_.size()) {
      if (at_line_start_) {
        if (handle_line_start()) continue;
      }
      lex_one();
    }
    if (depth_ > 0) throw SyntaxError("unexpected EOF in bracketed expression", line_);
    if (!out_.empty() && out_.back().kind != TokenKind::kNewline &&
        out_.back().kind != TokenKind::kDedent) {
      push(TokenKind::kNewline, "", pos_, pos_);
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      alt_indents_.pop_back();
      push(TokenKind::kDedent, "", pos_, pos_);
    }
    push(TokenKind::kEnd, "", pos_, pos_);
    return std::move(out_);
  }

 private:
  // Measures indentation of a new logical line. Returns true if the line was
  // blank or comment-only and has been consumed.
  bool handle_line_start() {
    // Widths with tab stops of 8 and of 1; they must order lines the same
    // way or the indentation is ambiguous (TabError).
    int width = 0;
    int alt = 0;
    std::size_t p = pos_;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
      if (src_[p] == ' ') {
        ++width;
        ++alt;
      } else if (src_[p] == '\t') {
        width = (width / 8 + 1) * 8;
        ++alt;
      } else {
        width = alt = 0;
      }
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return true;
    }
    char c = src_[p];
    if (c == '#' || c == '\n' || c == '\r') {
      while (p < src_.size() && src_[p] != '\n') ++p;
      if (p < src_.size()) {
        ++p;
        ++line_;
        line_begin_ = p;
      }
      pos_ = p;
      return true;
    }
    pos_ = p;
    at_line_start_ = false;
    if (width > indents_.back()) {
      if (alt <= alt_indents_.back()) throw SyntaxError("inconsistent use of tabs and spaces in indentation", line_);
      indents_.push_back(width);
      alt_indents_.push_back(alt);
      push(TokenKind::kIndent, "", pos_, pos_);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        alt_indents_.pop_back();
        push(TokenKind::kDedent, "", pos_, pos_);
      }
      if (width != indents_.back()) {
        throw SyntaxError("unindent does not match any outer indentation level", line_);
      }
      if (alt != alt_indents_.back()) throw SyntaxError("inconsistent use of tabs and spaces in indentation", line_);
    }
    return false;
  }

  void lex_one() {
    char c = src_[pos_];
    if (c == ' ' || c == '\t' || c == '\f') {
      ++pos_;
      return;
    }
    if (c == '\r') {
      ++pos_;
      return;
    }
    if (c == '#') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return;
    }
    if (c == '\\') {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && src_[p] == '\r') ++p;
      if (p < src_.size() && src_[p] == '\n') {
        pos_ = p + 1;
        ++line_;
        line_begin_ = pos_;
        return;
      }
      if (p >= src_.size()) throw SyntaxError("unexpected EOF after line continuation", line_);
      throw SyntaxError("unexpected character after line continuation character", line_);
    }
    if (c == '\n') {
      if (depth_ == 0) {
        push(TokenKind::kNewline, "\n", pos_, pos_ + 1);
        at_line_start_ = true;
      }
      ++pos_;
      ++line_;
      line_begin_ = pos_;
      return;
    }
    auto uc = static_cast<unsigned char>(c);
    if (is_ident_start(uc)) {
      std::size_t p = pos_;
      while (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) ++p;
      if (p < src_.size() && (src_[p] == '\'' || src_[p] == '"') && p - pos_ <= 2 &&
          valid_string_prefix(std::string(src_.substr(pos_, p - pos_)))) {
        lex_string(pos_, p);
        return;
      }
      push(TokenKind::kName, std::string(src_.substr(pos_, p - pos_)), pos_, p);
      pos_ = p;
      return;
    }
    if (std::isdigit(uc) || (c == '.' && pos_ + 1 < src_.size() &&
                             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(pos_, pos_);
      return;
    }
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        if (op == "(" || op == "[" || op == "{") {
          ++depth_;
        } else if (op == ")" || op == "]" || op == "}") {
          if (depth_ == 0) throw SyntaxError("unmatched '" + std::string(op) + "'", line_);
          --depth_;
        }
        push(TokenKind::kOp, std::string(op), pos_, pos_ + op.size());
        pos_ += op.size();
        return;
      }
    }
    throw SyntaxError(std::string("invalid character '") + c + "'", line_);
  }

  void lex_number() {
    std::size_t p = pos_;
    auto digit_run = [&](auto pred) {
      std::size_t start = p;
      while (p < src_.size() && (pred(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) {
        if (src_[p] == '_' && (p + 1 >= src_.size() || !pred(static_cast<unsigned char>(src_[p + 1])))) {
          throw SyntaxError("invalid decimal literal", line_);
        }
        ++p;
      }
      return p > start;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    bool is_float = false;
    if (src_[p] == '0' && p + 1 < src_.size() && std::strchr("xXoObB", src_[p + 1]) != nullptr &&
        src_[p + 1] != '\0') {
      char base = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[p + 1])));
      p += 2;
      if (p < src_.size() && src_[p] == '_') ++p;
      bool ok = false;
      if (base == 'x') ok = digit_run([](unsigned char ch) { return std::isxdigit(ch) != 0; });
      else if (base == 'o') ok = digit_run([](unsigned char ch) { return ch >= '0' && ch <= '7'; });
      else ok = digit_run([](unsigned char ch) { return ch == '0' || ch == '1'; });
      if (!ok) throw SyntaxError("invalid number literal", line_);
    } else {
      std::size_t int_start = p;
      digit_run(is_dec);
      std::string_view int_part = src_.substr(int_start, p - int_start);
      if (p < src_.size() && src_[p] == '.') {
        is_float = true;
        ++p;
        digit_run(is_dec);
      }
      if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
        std::size_t save = p;
        ++p;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
        if (!digit_run(is_dec)) {
          p = save;
        } else {
          is_float = true;
        }
      }
      if (!is_float && int_part.size() > 1 && int_part[0] == '0' &&
          int_part.find_first_not_of("0_") != std::string_view::npos) {
        throw SyntaxError("leading zeros in decimal integer literals are not permitted", line_);
      }
    }
    if (p < src_.size() && (src_[p] == 'j' || src_[p] == 'J')) ++p;
    if (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) {
      throw SyntaxError("invalid decimal literal", line_);
    }
    push(TokenKind::kNumber, std::string(src_.substr(pos_, p - pos_)), pos_, p);
    pos_ = p;
  }

  void lex_string(std::size_t begin, std::size_t quote_pos) {
    std::string prefix(src_.substr(begin, quote_pos - begin));
    std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    const char q = src_[quote_pos];
    const bool triple = src_.substr(quote_pos, 3) == std::string(3, q);
    const std::size_t qlen = triple ? 3 : 1;
    const int start_line = line_;
    std::size_t p = quote_pos + qlen;
    const std::size_t body_begin = p;
    while (true) {
      if (p >= src_.size()) {
        throw SyntaxError(triple ? "unterminated triple-quoted string literal"
                                 : "unterminated string literal",
                          start_line);
      }
      char ch = src_[p];
      if (ch == '\\') {
        if (p + 1 < src_.size() && src_[p + 1] == '\n') {
          ++line_;
          line_begin_ = p + 2;
        }
        p += 2;
        continue;
      }
      if (ch == '\n') {
        if (!triple) throw SyntaxError("unterminated string literal", start_line);
        ++line_;
        line_begin_ = p + 1;
        ++p;
        continue;
      }
      if (ch == q && (!triple || src_.substr(p, 3) == std::string(3, q))) break;
      ++p;
    }
    Token t;
    t.kind = TokenKind::kString;
    t.prefix = prefix;
    t.body = std::string(src_.substr(body_begin, p - body_begin));
    p += qlen;
    t.text = std::string(src_.substr(begin, p - begin));
    t.line = start_line;
    t.col = static_cast<int>(begin - start_line_begin(begin));
    t.end_line = line_;
    t.begin = begin;
    t.end = p;
    out_.push_back(std::move(t));
    pos_ = p;
  }

  std::size_t start_line_begin(std::size_t offset) const {
    std::size_t b = src_.rfind('\n', offset == 0 ? 0 : offset - 1);
    return (b == std::string_view::npos || offset == 0) ? 0 : b + 1;
  }

  void push(TokenKind kind, std::string text, std::size_t begin, std::size_t end) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.line = line_;
    t.end_line = line_;
    t.col = static_cast<int>(begin >= line_begin_ ? begin - line_begin_ : 0);
    t.begin = begin;
    t.end = end;
    out_.push_back(std::move(t));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_begin_ = 0;
  int line_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<int> indents_;
  std::vector<int> alt_indents_;
  std::vector<Token> out_;
};

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

std::string decode_string_body(std::string_view body, bool raw) {
  if (raw) return std::string(body);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out.push_back(c);
      continue;
    }
    char e = body[++i];
    auto hex_value = [&](std::size_t digits) -> long {
      long v = 0;
      for (std::size_t k = 1; k <= digits; ++k) {
        if (i + k >= body.size() || !std::isxdigit(static_cast<unsigned char>(body[i + k]))) return -1;
        char h = static_cast<char>(std::tolower(static_cast<unsigned char>(body[i + k])));
        v = v * 16 + (h <= '9' ? h - '0' : h - 'a' + 10);
      }
      return v;
    };
    switch (e) {
      case '\n': break;
      case '\\': out.push_back('\\'); break;
      case '\'': out.push_back('\''); break;
      case '"': out.push_back('"'); break;
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      case 'v': out.push_back('\v'); break;
      case 'x': case 'u': case 'U': {
        std::size_t digits = e == 'x' ? 2 : (e == 'u' ? 4 : 8);
        long v = hex_value(digits);
        if (v < 0) {
          out.push_back('\\');
          out.push_back(e);
        } else {
          append_utf8(out, static_cast<std::uint32_t>(v));
          i += digits;
        }
        break;
      }
      default:
        if (e >= '0' && e <= '7') {
          int v = e - '0';
          for (int k = 0; k < 2 && i + 1 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7'; ++k) {
            v = v * 8 + (body[++i] - '0');
          }
          append_utf8(out, static_cast<std::uint32_t>(v));
        } else {
          out.push_back('\\');
          out.push_back(e);
        }
    }
  }
  return out;
}

}  // namespace relbench::py
