#include <algorithm>
#include <set>

#include "extract.hpp"

namespace relbench::corpus {

namespace {

const std::set<std::string_view> kNotMethodNames = {
    "if", "for", "while", "switch", "catch", "synchronized", "return", "new", "throw", "try",
    "else", "do", "case", "assert", "super", "this",
};

bool is_type_keyword(const Scan& s, std::size_t i) {
  if (!s.is_ident(i)) return false;
  std::string_view t = s.at(i).text;
  if (t != "class" && t != "interface" && t != "enum" && t != "record") return false;
  if (i > 0 && s.is(i - 1, ".")) return false;  // Foo.class
  return s.is_ident(i + 1);
}

class JavaExtractor {
 public:
  explicit JavaExtractor(const Scan& s) : s_(s) {}

  std::vector<RawFunction> run() {
    code_block(0, s_.size());
    std::stable_sort(out_.begin(), out_.end(),
                     [](const RawFunction& a, const RawFunction& b) { return a.begin < b.begin; });
    return std::move(out_);
  }

 private:
  // Opening brace of a type declaration whose keyword is at `kw`.
  std::size_t type_body(std::size_t kw) const {
    std::size_t j = kw + 2;
    while (j < s_.size() && !s_.is(j, "{")) {
      if (s_.is(j, "(") || s_.is(j, "[")) j = s_.match[j];
      if (s_.is(j, ";")) return kNone;
      ++j;
    }
    return j < s_.size() ? j : kNone;
  }

  // Scans statements and expressions for local, anonymous and nested types.
  void code_block(std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (is_type_keyword(s_, i)) {
        std::size_t body = type_body(i);
        if (body == kNone) continue;
        std::string name(s_.at(i + 1).text);
        class_body(body + 1, s_.match[body], name, s_.at(i).text == "enum");
        i = s_.match[body];
        continue;
      }
      if (s_.is_ident(i, "new")) {
        std::size_t anon = anonymous_body(i);
        if (anon != kNone) {
          class_body(anon + 1, s_.match[anon], anonymous_name(i), false);
          i = s_.match[anon];
        }
      }
    }
  }

  // `new Type<...>(args) {` -> index of the `{`.
  std::size_t anonymous_body(std::size_t new_kw) const {
    std::size_t j = new_kw + 1;
    while (j < s_.size() && (s_.at(j).kind == TokKind::kIdent || s_.is(j, ".") || s_.is(j, "<") ||
                             s_.is(j, ">") || s_.is(j, ",") || s_.is(j, "?"))) {
      ++j;
    }
    if (!s_.is(j, "(")) return kNone;
    j = s_.match[j] + 1;
    return s_.is(j, "{") ? j : kNone;
  }

  std::string anonymous_name(std::size_t new_kw) const {
    std::size_t j = new_kw + 1;
    std::string name;
    while (j < s_.size() && (s_.at(j).kind == TokKind::kIdent || s_.is(j, "."))) {
      if (s_.at(j).kind == TokKind::kIdent) name = std::string(s_.at(j).text);
      ++j;
    }
    return name;
  }

  void class_body(std::size_t begin, std::size_t end, const std::string& cls, bool is_enum) {
    std::size_t i = begin;
    std::size_t member_start = begin;
    if (is_enum) {
      // Constants come first, up to the first top-level `;`.
      while (i < end && !s_.is(i, ";")) {
        if (s_.is(i, "{")) {
          class_body(i + 1, s_.match[i], cls, false);
          i = s_.match[i];
        } else if (s_.is(i, "(")) {
          code_block(i + 1, s_.match[i]);
          i = s_.match[i];
        }
        ++i;
      }
      member_start = ++i;
    }
    while (i < end) {
      if (s_.is(i, ";") || s_.is(i, "}")) {
        member_start = ++i;
        continue;
      }
      if (s_.is(i, "@") && s_.is_ident(i + 1) && s_.at(i + 1).text != "interface") {
        i += 2;
        while (s_.is(i, ".") && s_.is_ident(i + 1)) i += 2;
        if (s_.is(i, "(")) i = s_.match[i] + 1;
        continue;
      }
      if (s_.is(i, "@") && s_.is_ident(i + 1, "interface")) {
        std::size_t body = type_body(i + 1);
        if (body == kNone) break;
        class_body(body + 1, s_.match[body], std::string(s_.at(i + 2).text), false);
        i = s_.match[body] + 1;
        member_start = i;
        continue;
      }
      if (is_type_keyword(s_, i)) {
        std::size_t body = type_body(i);
        if (body == kNone) {
          ++i;
          continue;
        }
        class_body(body + 1, s_.match[body], std::string(s_.at(i + 1).text), s_.at(i).text == "enum");
        i = s_.match[body] + 1;
        member_start = i;
        continue;
      }
      if (s_.is(i, "{")) {
        code_block(i + 1, s_.match[i]);  // initializer block
        i = s_.match[i] + 1;
        member_start = i;
        continue;
      }
      if (s_.is_ident(i) && s_.is(i + 1, "(") && !kNotMethodNames.count(s_.at(i).text) &&
          !(i > 0 && s_.is_ident(i - 1, "new"))) {
        std::size_t close = s_.match[i + 1];
        std::size_t body = method_body(close + 1);
        if (body != kNone) {
          out_.push_back(make_function(s_, cls + "." + std::string(s_.at(i).text), member_start, s_.match[body]));
          code_block(body + 1, s_.match[body]);
          i = s_.match[body] + 1;
          member_start = i;
          continue;
        }
        code_block(i + 1, close);
        i = close + 1;
        continue;
      }
      if (s_.is(i, "(") || s_.is(i, "[")) {
        code_block(i + 1, s_.match[i]);
        i = s_.match[i] + 1;
        continue;
      }
      if (s_.is_ident(i, "new")) {
        std::size_t anon = anonymous_body(i);
        if (anon != kNone) {
          class_body(anon + 1, s_.match[anon], anonymous_name(i), false);
          i = s_.match[anon] + 1;
          continue;
        }
      }
      ++i;
    }
  }

  // After a parameter list: optional array dims and `throws` clause, then `{`.
  std::size_t method_body(std::size_t j) const {
    while (j < s_.size()) {
      if (s_.is(j, "{")) return j;
      if (s_.is(j, "[") || s_.is(j, "]") || s_.is(j, ",") || s_.is(j, ".") || s_.is(j, "<") || s_.is(j, ">") ||
          s_.at(j).kind == TokKind::kIdent) {
        if (s_.is_ident(j, "default")) return kNone;
        ++j;
        continue;
      }
      if (s_.is(j, "@")) {
        ++j;
        continue;
      }
      return kNone;
    }
    return kNone;
  }

  const Scan& s_;
  std::vector<RawFunction> out_;
};

}  // namespace

std::vector<RawFunction> extract_java(std::string_view src) {
  Scan s = scan(src, Dialect::kJava);
  return JavaExtractor(s).run();
}

}  // namespace relbench::corpus
