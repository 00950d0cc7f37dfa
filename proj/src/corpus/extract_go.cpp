#include "extract.hpp"

namespace relbench::corpus {

namespace {

// Receiver type name: the last identifier outside type-parameter brackets.
std::string receiver_type(const Scan& s, std::size_t open, std::size_t close) {
  std::string name;
  for (std::size_t k = open + 1; k < close; ++k) {
    if (s.is(k, "[")) {
      k = s.match[k];
      continue;
    }
    if (s.at(k).kind == TokKind::kIdent) name = std::string(s.at(k).text);
  }
  return name;
}

// Body brace after a signature ending before `j`. A body must open on the
// line where the signature ends; `struct{...}` and `interface{...}` result
// types are skipped.
std::size_t find_body(const Scan& s, std::size_t j) {
  while (j < s.size()) {
    if (s.at(j).line != s.at(j - 1).end_line) return kNone;
    if (s.is(j, "(") || s.is(j, "[")) {
      j = s.match[j] + 1;
      continue;
    }
    if (s.is(j, "{")) {
      if (s.is_ident(j - 1, "struct") || s.is_ident(j - 1, "interface")) {
        j = s.match[j] + 1;
        continue;
      }
      return j;
    }
    if (s.is(j, ";") || s.is(j, "}")) return kNone;
    ++j;
  }
  return kNone;
}

}  // namespace

std::vector<RawFunction> extract_go(std::string_view src) {
  Scan s = scan(src, Dialect::kGo);
  std::vector<RawFunction> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.is(i, "{") || s.is(i, "(") || s.is(i, "[")) {
      i = s.match[i] + 1;
      continue;
    }
    if (!s.is_ident(i, "func")) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    std::string receiver;
    if (s.is(j, "(")) {
      receiver = receiver_type(s, j, s.match[j]);
      j = s.match[j] + 1;
    }
    if (!s.is_ident(j)) {
      ++i;
      continue;
    }
    std::string name(s.at(j).text);
    ++j;
    if (s.is(j, "[")) j = s.match[j] + 1;
    if (!s.is(j, "(")) {
      ++i;
      continue;
    }
    std::size_t body = find_body(s, s.match[j] + 1);
    if (body == kNone) {
      i = s.match[j] + 1;
      continue;
    }
    out.push_back(make_function(s, receiver.empty() ? name : receiver + "." + name, i, s.match[body]));
    i = s.match[body] + 1;
  }
  return out;
}

}  // namespace relbench::corpus
