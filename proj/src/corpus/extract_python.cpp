#include <algorithm>

#include "extract.hpp"
#include "relbench/common/text.hpp"
#include "relbench/pyfront/parser.hpp"

namespace relbench::corpus {

namespace {

using py::Node;
using py::NodeKind;

// Docstring cleanup in the manner of inspect.cleandoc: strip the first
// line, remove the common indentation of the rest, drop blank edges.
std::string clean_docstring(const std::string& doc) {
  std::vector<std::string> lines = split(doc, '\n');
  for (auto& l : lines) {
    std::string expanded;
    for (char c : l) {
      if (c == '\t') {
        expanded.append(8 - expanded.size() % 8, ' ');
      } else {
        expanded.push_back(c);
      }
    }
    l = std::move(expanded);
  }
  std::size_t margin = std::string::npos;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t indent = lines[i].find_first_not_of(' ');
    if (indent != std::string::npos) margin = std::min(margin, indent);
  }
  if (!lines.empty()) lines[0] = std::string(trim(lines[0]));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (margin != std::string::npos && lines[i].size() >= margin) {
      lines[i] = lines[i].substr(margin);
    } else {
      lines[i] = std::string(trim(lines[i]));
    }
    while (!lines[i].empty() && std::isspace(static_cast<unsigned char>(lines[i].back()))) lines[i].pop_back();
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  return join(lines, "\n");
}

std::string docstring_of(const Node& fn) {
  const Node& body = *fn.kid(3);
  if (body.kids.empty()) return {};
  const Node& first = *body.kid(0);
  if (first.kind != NodeKind::kExpr) return {};
  const Node& value = *first.kid(0);
  if (value.kind != NodeKind::kConstant || value.const_kind != py::ConstKind::kStr) return {};
  return clean_docstring(value.value);
}

class PyExtractor {
 public:
  std::vector<RawFunction> out;

  // `owner` is the innermost enclosing class when the statement list is a
  // class body (or a block nested directly in one), empty otherwise.
  void statements(const Node& seq, const std::string& owner) {
    for (const auto& stmt : seq.kids) statement(*stmt, owner);
  }

 private:
  void statement(const Node& s, const std::string& owner) {
    switch (s.kind) {
      case NodeKind::kFunctionDef:
      case NodeKind::kAsyncFunctionDef: {
        RawFunction f;
        f.name = owner.empty() ? s.name : owner + "." + s.name;
        f.begin = s.begin;
        f.end = s.end;
        f.start_line = s.line;
        f.end_line = s.end_line;
        f.doc = docstring_of(s);
        out.push_back(std::move(f));
        statements(*s.kid(3), {});
        return;
      }
      case NodeKind::kClassDef:
        statements(*s.kid(2), s.name);
        return;
      default:
        // Compound statements (if/for/while/try/with) keep the owner.
        for (const auto& kid : s.kids) {
          if (kid && kid->kind == NodeKind::kSeq) statements(*kid, owner);
          if (kid && kid->kind == NodeKind::kExceptHandler) statements(*kid->kid(1), owner);
        }
    }
  }
};

}  // namespace

std::vector<RawFunction> extract_python(std::string_view src) {
  auto module = py::parse_module(src);
  PyExtractor ex;
  ex.statements(*module, {});
  std::stable_sort(ex.out.begin(), ex.out.end(),
                   [](const RawFunction& a, const RawFunction& b) { return a.begin < b.begin; });
  return std::move(ex.out);
}

}  // namespace relbench::corpus
