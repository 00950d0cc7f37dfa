#pragma once

#include <string_view>

#include "relbench/pyfront/ast.hpp"
#include "relbench/pyfront/lexer.hpp"

namespace relbench::py {

// Parses a Python 3 module. Throws SyntaxError for input the reference
// parser would reject (Python 2 print statements, bad indentation, invalid
// assignment targets, and so on). `match` statements are not supported.
NodePtr parse_module(std::string_view source);

// Depth-first pre-order traversal in source order. The visitor returns false
// to stop the walk; walk() returns false if it was stopped.
template <typename Visitor>
bool walk(const Node& node, Visitor&& visit) {
  if (!visit(node)) return false;
  for (const auto& kid : node.kids) {
    if (kid && !walk(*kid, visit)) return false;
  }
  return true;
}

}  // namespace relbench::py
