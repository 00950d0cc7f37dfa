#include <set>

#include "extract.hpp"

namespace relbench::corpus {

namespace {

const std::set<std::string_view> kCKeywords = {
    "if", "while", "for", "switch", "return", "sizeof", "do", "else", "case", "typedef", "goto", "_Alignof",
    "_Generic", "_Static_assert", "alignof", "__typeof__", "typeof", "defined",
};

// First token of the declaration whose name is at `name`: everything back to
// the previous `;`, brace, or preprocessor line.
std::size_t declaration_start(const Scan& s, std::size_t name) {
  std::size_t i = name;
  while (i > 0) {
    const Tok& prev = s.at(i - 1);
    if (prev.kind == TokKind::kPunct && (prev.text == ";" || prev.text == "{" || prev.text == "}")) break;
    if (prev.kind == TokKind::kString) break;  // extern "C"
    // A preprocessor line between the two tokens ends the declaration too.
    bool directive_between = false;
    for (std::size_t k = s.code[i - 1] + 1; k < s.code[i]; ++k) {
      if (s.all[k].kind == TokKind::kPreproc) directive_between = true;
    }
    if (directive_between) break;
    --i;
  }
  return i;
}

bool identifier_list(const Scan& s, std::size_t open, std::size_t close) {
  if (close <= open + 1) return false;
  for (std::size_t k = open + 1; k < close; ++k) {
    bool ok = (k - open) % 2 == 1 ? s.at(k).kind == TokKind::kIdent : s.is(k, ",");
    if (!ok) return false;
  }
  return true;
}

const std::set<std::string_view> kAttributeWords = {
    "__attribute__", "__attribute", "__declspec", "asm", "__asm__", "__asm", "__THROW", "__nonnull", "__wur",
};

const std::set<std::string_view> kDeclarationWords = {
    "struct", "union", "enum", "typedef", "static", "extern", "inline", "void", "int", "char", "unsigned",
};

// Position of the body `{` for a declarator whose parameter list closes at
// `close`, or kNone when this is not a definition. Accepts trailing
// attribute-like macros and K&R parameter declarations.
std::size_t find_body(const Scan& s, std::size_t open, std::size_t close) {
  bool knr = identifier_list(s, open, close);
  std::size_t j = close + 1;
  for (int budget = 0; j < s.size() && budget < 128; ++budget) {
    const Tok& t = s.at(j);
    if (t.kind == TokKind::kIdent && s.is(j + 1, "(") && !kAttributeWords.count(t.text)) {
      // Another declarator: the group before it was a macro invocation.
      return kNone;
    }
    if (!knr && t.kind == TokKind::kIdent && kDeclarationWords.count(t.text)) {
      // A type or storage keyword starts a new declaration.
      return kNone;
    }
    if (t.kind == TokKind::kPunct) {
      if (t.text == "{") {
        // Old-style parameter declarations always end in a semicolon.
        if (knr && j != close + 1 && !s.is(j - 1, ";") && !s.is(j - 1, ")")) return kNone;
        return j;
      }
      if (t.text == "(") {
        j = s.match[j] + 1;
        continue;
      }
      bool knr_punct = t.text == ";" || t.text == "," || t.text == "*" || t.text == "[" || t.text == "]";
      if (!(knr && knr_punct)) return kNone;
    } else if (t.kind == TokKind::kString) {
      return kNone;
    }
    ++j;
  }
  return kNone;
}

}  // namespace

std::vector<RawFunction> extract_c(std::string_view src) {
  Scan s = scan(src, Dialect::kC);
  std::vector<RawFunction> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const Tok& t = s.at(i);
    if (t.kind == TokKind::kIdent && t.text == "extern" && i + 2 < s.size() && s.at(i + 1).kind == TokKind::kString &&
        s.is(i + 2, "{")) {
      i += 3;  // the linkage block is transparent
      continue;
    }
    if (s.is(i, "{")) {
      i = s.match[i] + 1;  // struct, union, enum bodies and initializers
      continue;
    }
    if (t.kind == TokKind::kIdent && !kCKeywords.count(t.text) && s.is(i + 1, "(")) {
      std::size_t close = s.match[i + 1];
      std::size_t name = i;
      std::size_t params = i + 1;
      if (s.is(i + 2, "*")) {
        // Function returning a function pointer: int (*name(params))(args) {
        for (std::size_t k = i + 2; k < close; ++k) {
          if (s.is_ident(k) && s.is(k + 1, "(")) {
            name = k;
            params = k + 1;
            break;
          }
        }
      }
      std::size_t body = name == i ? find_body(s, params, close) : find_body(s, close, close);
      if (body != kNone && (name != i || !s.is(i + 2, "*"))) {
        std::size_t first = declaration_start(s, i);
        out.push_back(make_function(s, std::string(s.at(name).text), first, s.match[body]));
        i = s.match[body] + 1;
        continue;
      }
    }
    ++i;
  }
  return out;
}

RawFunction make_function(const Scan& s, std::string name, std::size_t first, std::size_t last) {
  RawFunction f;
  f.name = std::move(name);
  f.begin = s.at(first).begin;
  f.end = s.at(last).end;
  f.start_line = s.at(first).line;
  f.end_line = s.at(last).end_line;
  f.doc = leading_doc(s, first);
  return f;
}

}  // namespace relbench::corpus
