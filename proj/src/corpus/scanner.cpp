#include "scanner.hpp"

#include <algorithm>
#include <set>

#include "relbench/common/text.hpp"

namespace relbench::corpus {

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

// Tokens after which a JavaScript `/` begins a regular expression.
bool regex_allowed(const std::vector<Tok>& all, const std::vector<std::size_t>& code) {
  if (code.empty()) return true;
  const Tok& prev = all[code.back()];
  if (prev.kind == TokKind::kNumber || prev.kind == TokKind::kString) return false;
  if (prev.kind == TokKind::kIdent) {
    static const std::set<std::string_view> kw = {"return", "typeof", "case",  "do",    "else", "in",
                                                  "of",     "new",    "delete", "void", "throw",
                                                  "instanceof", "yield", "await"};
    return kw.count(prev.text) > 0;
  }
  return prev.text != ")" && prev.text != "]" && prev.text != "}";
}

class Scanner {
 public:
  Scanner(std::string_view src, Dialect dialect) : src_(src), dialect_(dialect) {}

  Scan run() {
    Scan out;
    while (pos_ < src_.size()) {
      unsigned char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        at_line_start_ = true;
        continue;
      }
      if (std::isspace(c)) {
        ++pos_;
        continue;
      }
      std::size_t begin = pos_;
      int line = line_;
      TokKind kind;
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        kind = TokKind::kComment;
      } else if (c == '/' && peek(1) == '*') {
        block_comment();
        kind = TokKind::kComment;
      } else if (c == '#' && dialect_ == Dialect::kC && at_line_start_) {
        preprocessor();
        kind = TokKind::kPreproc;
      } else if (c == '"' || c == '\'' || c == '`') {
        string_literal(c);
        kind = TokKind::kString;
      } else if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        number();
        kind = TokKind::kNumber;
      } else if (ident_start(c)) {
        while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
        kind = TokKind::kIdent;
      } else if (c == '/' && dialect_ == Dialect::kJavaScript && regex_allowed(out.all, out.code)) {
        regex();
        kind = TokKind::kString;
      } else {
        pos_ += punct_length();
        kind = TokKind::kPunct;
      }
      at_line_start_ = false;
      if (kind == TokKind::kPreproc) {
        conditional(src_.substr(begin, pos_ - begin));
      } else if (skipping_ > 0) {
        kind = TokKind::kPreproc;  // inside an inactive #else/#elif branch
      }
      out.all.push_back(Tok{kind, src_.substr(begin, pos_ - begin), begin, pos_, line, line_});
      if (kind != TokKind::kComment && kind != TokKind::kPreproc) out.code.push_back(out.all.size() - 1);
    }
    match_brackets(out);
    return out;
  }

 private:
  char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  void advance_char() {
    if (src_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void block_comment() {
    int start = line_;
    pos_ += 2;
    while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance_char();
    if (pos_ + 1 >= src_.size()) throw ScanError("unterminated block comment", start);
    pos_ += 2;
  }

  void preprocessor() {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && peek(1) == '\n') {
        ++pos_;
        advance_char();
        continue;
      }
      if (src_[pos_] == '/' && peek(1) == '*') {
        block_comment();
        continue;
      }
      ++pos_;
    }
  }

  // Only the first branch of each #if group is kept, so code that opens a
  // brace in both #if and #else arms still balances.
  void conditional(std::string_view directive) {
    directive.remove_prefix(1);
    directive = trim(directive);
    std::size_t n = 0;
    while (n < directive.size() && std::isalpha(static_cast<unsigned char>(directive[n]))) ++n;
    std::string_view name = directive.substr(0, n);
    bool opens = name == "if" || name == "ifdef" || name == "ifndef";
    bool alternative = name == "else" || name == "elif" || name == "elifdef" || name == "elifndef";
    if (skipping_ > 0) {
      if (opens) ++skipping_;
      if (name == "endif" && --skipping_ == 0) --depth_;
      return;
    }
    if (opens) ++depth_;
    if (name == "endif" && depth_ > 0) --depth_;
    if (alternative && depth_ > 0) skipping_ = 1;
  }

  void string_literal(char quote) {
    int start = line_;
    bool text_block = dialect_ == Dialect::kJava && quote == '"' && peek(1) == '"' && peek(2) == '"';
    if (text_block) {
      pos_ += 3;
      while (pos_ + 2 < src_.size() && !(src_[pos_] == '"' && src_[pos_ + 1] == '"' && src_[pos_ + 2] == '"')) {
        if (src_[pos_] == '\\') advance_char();
        advance_char();
      }
      if (pos_ + 2 >= src_.size()) throw ScanError("unterminated text block", start);
      pos_ += 3;
      return;
    }
    if (quote == '`') {
      if (dialect_ == Dialect::kGo) return raw_string(start);
      if (dialect_ == Dialect::kJavaScript) return template_literal(start);
    }
    ++pos_;
    // Ordinary literals end at the closing quote or, leniently, the line end.
    while (pos_ < src_.size() && src_[pos_] != quote && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
        if (src_[pos_ + 1] == '\n') ++line_;
        ++pos_;
      }
      ++pos_;
    }
    if (pos_ < src_.size() && src_[pos_] == quote) ++pos_;
  }

  void raw_string(int start) {
    ++pos_;
    while (pos_ < src_.size() && src_[pos_] != '`') advance_char();
    if (pos_ >= src_.size()) throw ScanError("unterminated raw string", start);
    ++pos_;
  }

  void template_literal(int start) {
    ++pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\') {
        ++pos_;
        if (pos_ < src_.size()) advance_char();
        continue;
      }
      if (c == '`') {
        ++pos_;
        return;
      }
      if (c == '$' && peek(1) == '{') {
        pos_ += 2;
        template_expression(start);
        continue;
      }
      advance_char();
    }
    throw ScanError("unterminated template literal", start);
  }

  // Skips a ${...} substitution, including nested strings and templates.
  void template_expression(int start) {
    int depth = 1;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '"' || c == '\'' || c == '`') {
        string_literal(c);
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        block_comment();
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        ++pos_;
        return;
      }
      advance_char();
    }
    throw ScanError("unterminated template substitution", start);
  }

  void regex() {
    ++pos_;
    bool in_class = false;
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '[') in_class = true;
      if (c == ']') in_class = false;
      ++pos_;
      if (c == '/' && !in_class) break;
    }
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  void number() {
    while (pos_ < src_.size()) {
      unsigned char c = src_[pos_];
      if (std::isalnum(c) || c == '_' || c == '.' || c == '\'') {
        char lower = static_cast<char>(c | 0x20);
        ++pos_;
        if ((lower == 'e' || lower == 'p') && (peek(0) == '+' || peek(0) == '-')) ++pos_;
        continue;
      }
      break;
    }
  }

  std::size_t punct_length() const {
    static const std::string_view kLong[] = {"...", "=>", "->", "::"};
    for (auto op : kLong) {
      if (src_.substr(pos_, op.size()) == op) return op.size();
    }
    return 1;
  }

  static void match_brackets(Scan& s) {
    s.match.assign(s.code.size(), kNone);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < s.code.size(); ++i) {
      const Tok& t = s.at(i);
      if (t.kind != TokKind::kPunct || t.text.size() != 1) continue;
      char c = t.text[0];
      if (c == '(' || c == '[' || c == '{') {
        stack.push_back(i);
      } else if (c == ')' || c == ']' || c == '}') {
        char open = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (stack.empty() || s.at(stack.back()).text[0] != open) {
          throw ScanError(std::string("unbalanced '") + c + "'", t.line);
        }
        s.match[stack.back()] = i;
        s.match[i] = stack.back();
        stack.pop_back();
      }
    }
    if (!stack.empty()) throw ScanError("unclosed bracket", s.at(stack.back()).line);
  }

  std::string_view src_;
  Dialect dialect_;
  std::size_t pos_ = 0;
  int line_ = 1;
  bool at_line_start_ = true;
  int depth_ = 0;     // open #if groups
  int skipping_ = 0;  // nesting inside an inactive branch, 0 when active
};

}  // namespace

Scan scan(std::string_view source, Dialect dialect) { return Scanner(source, dialect).run(); }

std::string strip_comment(std::string_view comment) {
  std::vector<std::string> lines;
  if (starts_with(comment, "//")) {
    std::size_t i = 0;
    while (i < comment.size() && (comment[i] == '/' || comment[i] == '!')) ++i;
    lines.emplace_back(trim(comment.substr(i)));
  } else {
    std::string_view body = comment.substr(2, comment.size() >= 4 ? comment.size() - 4 : 0);
    while (!body.empty() && (body.front() == '*' || body.front() == '!')) body.remove_prefix(1);
    for (const auto& raw : split(body, '\n')) {
      std::string_view line = trim(raw);
      if (!line.empty() && line.front() == '*') line = trim(line.substr(1));
      lines.emplace_back(line);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  return join(lines, "\n");
}

std::string leading_doc(const Scan& s, std::size_t first) {
  std::size_t idx = s.code[first];
  int next_line = s.all[idx].line;
  std::vector<std::string> parts;
  while (idx > 0) {
    const Tok& t = s.all[idx - 1];
    if (t.kind != TokKind::kComment || t.end_line < next_line - 1) break;
    // A trailing comment on a line of code belongs to that code.
    if (idx >= 2 && s.all[idx - 2].kind != TokKind::kComment && s.all[idx - 2].end_line == t.line) break;
    parts.push_back(strip_comment(t.text));
    next_line = t.line;
    --idx;
  }
  std::reverse(parts.begin(), parts.end());
  std::vector<std::string> kept;
  for (auto& p : parts) {
    if (!p.empty()) kept.push_back(std::move(p));
  }
  return join(kept, "\n");
}

}  // namespace relbench::corpus
