#include <string>

#include "literal.hpp"

#include "relbench/pyfront/lexer.hpp"
#include "relbench/pyfront/parser.hpp"
#include "relbench/transpile/transpile.hpp"

namespace relbench::transpile {

using py::ConstKind;
using py::Node;
using py::NodeKind;

namespace {

constexpr std::string_view kCategoryNames[] = {
    "SourceCode", "Generic", "NoneNotAllowed", "InvalidAnnotation", "AttributeError", "SyntaxError",
};

using Result = std::optional<Failure>;

Failure make(Category category, std::string node_kind, std::string detail, int line) {
  return Failure{category, std::move(node_kind), std::move(detail), line};
}

Failure source_code(const Node& node, std::string node_kind = {}) {
  if (node_kind.empty()) node_kind = std::string(py::kind_name(node.kind));
  std::string detail = "unsupported construct: " + node_kind;
  return make(Category::kSourceCode, std::move(node_kind), std::move(detail), node.line);
}

Failure generic(const Node& node, std::string detail) {
  return make(Category::kGeneric, "", std::move(detail), node.line);
}

bool is_arith_op(std::string_view op) {
  return op == "Add" || op == "Sub" || op == "Mult" || op == "Div" || op == "Mod";
}

bool is_none(const Node& node) {
  return node.kind == NodeKind::kConstant && node.const_kind == ConstKind::kNone;
}

bool is_docstring(const Node& stmt) {
  return stmt.kind == NodeKind::kExpr && stmt.kid(0)->kind == NodeKind::kConstant &&
         stmt.kid(0)->const_kind == ConstKind::kStr;
}

bool contains_call(const Node& node) {
  return !py::walk(node, [](const Node& n) { return n.kind != NodeKind::kCall; });
}

class Checker {
 public:
  Result module(const Node& mod) {
    const Node* function = nullptr;
    for (const auto& stmt : mod.kids) {
      switch (stmt->kind) {
        case NodeKind::kFunctionDef:
          if (function) return generic(*stmt, "more than one top-level function");
          function = stmt.get();
          if (auto f = function_def(*stmt)) return f;
          break;
        case NodeKind::kAsyncFunctionDef:
        case NodeKind::kClassDef:
        case NodeKind::kImport:
        case NodeKind::kImportFrom:
          return source_code(*stmt);
        default:
          return generic(*stmt, "module-level statement " + std::string(py::kind_name(stmt->kind)));
      }
    }
    if (!function) return make(Category::kGeneric, "", "no function definition", 1);
    return std::nullopt;
  }

 private:
  Result function_def(const Node& fn) {
    const Node& decorators = *fn.kid(0);
    if (!decorators.kids.empty()) return generic(*decorators.kid(0), "decorators are not supported");
    for (const auto& arg : fn.kid(1)->kids) {
      if (arg->op != "pos" && arg->op != "posonly") {
        return generic(*arg, "variadic or keyword-only parameter '" + arg->name + "'");
      }
      if (!arg->kid(0)->empty()) {
        if (auto f = annotation(*arg->kid(0), false)) return f;
      }
      const Node& dflt = *arg->kid(1);
      if (!dflt.empty()) {
        if (is_none(dflt)) {
          return make(Category::kNoneNotAllowed, "", "None default for parameter '" + arg->name + "'",
                      dflt.line);
        }
        return generic(dflt, "default parameter values are not supported");
      }
    }
    if (!fn.kid(2)->empty()) {
      if (auto f = annotation(*fn.kid(2), true)) return f;
    }
    const auto& body = fn.kid(3)->kids;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i == 0 && is_docstring(*body[i])) continue;
      if (auto f = stmt(*body[i])) return f;
    }
    return std::nullopt;
  }

  Result annotation(const Node& node, bool is_return) {
    if (node.kind == NodeKind::kName && TypeMapping::map_annotation(node.name)) return std::nullopt;
    if (is_return && is_none(node)) return std::nullopt;
    std::string what = node.kind == NodeKind::kName ? node.name : std::string(py::kind_name(node.kind));
    return make(Category::kInvalidAnnotation, "", "annotation '" + what + "' has no C type", node.line);
  }

  Result block(const Node& seq) {
    for (const auto& s : seq.kids) {
      if (auto f = stmt(*s)) return f;
    }
    return std::nullopt;
  }

  Result target(const Node& node) {
    switch (node.kind) {
      case NodeKind::kName:
        return std::nullopt;
      case NodeKind::kAttribute:
        return make(Category::kAttributeError, "Attribute", "attribute '" + node.name + "'", node.line);
      case NodeKind::kSubscript:
        return node.kid(1)->kind == NodeKind::kSlice ? source_code(node, "Slice") : source_code(node);
      default:
        return source_code(node);
    }
  }

  Result stmt(const Node& s) {
    switch (s.kind) {
      case NodeKind::kFunctionDef:
        return source_code(s);
      case NodeKind::kReturn:
        if (s.kid(0)->empty()) return std::nullopt;
        return expr(*s.kid(0), true);
      case NodeKind::kAssign: {
        for (std::size_t i = 0; i + 1 < s.kids.size(); ++i) {
          if (auto f = target(*s.kid(i))) return f;
        }
        return expr(*s.kids.back(), true);
      }
      case NodeKind::kAugAssign:
        if (auto f = target(*s.kid(0))) return f;
        if (!is_arith_op(s.op)) return binop_failure(s);
        return expr(*s.kid(1), false);
      case NodeKind::kAnnAssign:
        if (auto f = target(*s.kid(0))) return f;
        if (auto f = annotation(*s.kid(1), false)) return f;
        if (s.kid(2)->empty()) return std::nullopt;
        return expr(*s.kid(2), true);
      case NodeKind::kFor:
        return for_loop(s);
      case NodeKind::kWhile:
      case NodeKind::kIf:
        if (auto f = expr(*s.kid(0), false)) return f;
        if (auto f = block(*s.kid(1))) return f;
        if (s.kind == NodeKind::kWhile && !s.kid(2)->kids.empty()) {
          return source_code(*s.kid(2)->kid(0), "While");
        }
        return block(*s.kid(2));
      case NodeKind::kExpr: {
        const Node& v = *s.kid(0);
        if (v.kind == NodeKind::kConstant && v.const_kind == ConstKind::kStr) {
          return generic(v, "string expression statement");
        }
        return expr(v, false);
      }
      case NodeKind::kPass:
      case NodeKind::kBreak:
      case NodeKind::kContinue:
        return std::nullopt;
      default:
        return source_code(s);
    }
  }

  Result for_loop(const Node& s) {
    if (auto f = target(*s.kid(0))) return f;
    const Node& iter = *s.kid(1);
    bool is_range = iter.kind == NodeKind::kCall && iter.kid(0)->kind == NodeKind::kName &&
                    iter.kid(0)->name == "range" && iter.kids.size() >= 2 && iter.kids.size() <= 4;
    if (is_range) {
      for (std::size_t i = 1; i < iter.kids.size(); ++i) {
        NodeKind k = iter.kid(i)->kind;
        if (k == NodeKind::kStarred || k == NodeKind::kKeyword) is_range = false;
      }
    }
    if (!is_range) {
      auto f = source_code(s);
      f.detail = "for loop over something other than range()";
      return f;
    }
    if (iter.kids.size() == 4) {
      const Node& step = *iter.kid(3);
      auto value = step.kind == NodeKind::kConstant && step.const_kind == ConstKind::kInt
                       ? int_literal_value(step.value)
                       : std::nullopt;
      if (!value || *value <= 0) {
        auto f = source_code(step, "For");
        f.detail = "range() step must be a positive integer constant";
        return f;
      }
    }
    for (std::size_t i = 1; i < iter.kids.size(); ++i) {
      if (auto f = expr(*iter.kid(i), false)) return f;
    }
    if (auto f = block(*s.kid(2))) return f;
    if (!s.kid(3)->kids.empty()) {
      auto f = source_code(*s.kid(3)->kid(0), "For");
      f.detail = "for-else is not supported";
      return f;
    }
    return std::nullopt;
  }

  Result binop_failure(const Node& node) {
    if (node.op == "Pow") return source_code(node, "BinOp-Pow");
    return source_code(node, node.op);
  }

  // `allow_str` marks value positions (return, assignment) where a string
  // literal may pass through unchanged.
  Result expr(const Node& e, bool allow_str) {
    switch (e.kind) {
      case NodeKind::kName:
        return std::nullopt;
      case NodeKind::kConstant:
        switch (e.const_kind) {
          case ConstKind::kNone:
            return make(Category::kNoneNotAllowed, "", "None value", e.line);
          case ConstKind::kTrue:
          case ConstKind::kFalse:
          case ConstKind::kFloat:
            return std::nullopt;
          case ConstKind::kInt:
            if (!int_literal_value(e.value)) return generic(e, "integer literal out of range: " + e.value);
            return std::nullopt;
          case ConstKind::kStr:
            if (allow_str) return std::nullopt;
            return generic(e, "string operation");
          default:
            return source_code(e, "Constant");
        }
      case NodeKind::kBinOp:
        if (!is_arith_op(e.op)) return binop_failure(e);
        if (auto f = expr(*e.kid(0), false)) return f;
        return expr(*e.kid(1), false);
      case NodeKind::kUnaryOp:
        if (e.op == "Invert") return source_code(e, "Invert");
        return expr(*e.kid(0), false);
      case NodeKind::kBoolOp:
        for (const auto& v : e.kids) {
          if (auto f = expr(*v, false)) return f;
        }
        return std::nullopt;
      case NodeKind::kCompare: {
        if (auto f = expr(*e.kid(0), false)) return f;
        for (std::size_t i = 0; i < e.names.size(); ++i) {
          const std::string& op = e.names[i];
          if (op == "Is" || op == "IsNot" || op == "In" || op == "NotIn") return source_code(e, op);
          const Node& rhs = *e.kid(i + 1);
          if (auto f = expr(rhs, false)) return f;
          bool middle = i + 1 < e.names.size();
          // The C expansion evaluates a middle operand twice.
          if (middle && contains_call(rhs)) {
            return generic(rhs, "chained comparison with a call in a middle operand");
          }
        }
        return std::nullopt;
      }
      case NodeKind::kCall: {
        const Node& func = *e.kid(0);
        if (func.kind == NodeKind::kAttribute) {
          return make(Category::kAttributeError, "Attribute", "attribute '" + func.name + "'", func.line);
        }
        if (func.kind != NodeKind::kName) return generic(func, "call target is not a plain name");
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          const Node& arg = *e.kid(i);
          if (arg.kind == NodeKind::kKeyword) return generic(arg, "keyword arguments are not supported");
          if (auto f = expr(arg, false)) return f;
        }
        return std::nullopt;
      }
      case NodeKind::kAttribute:
        return make(Category::kAttributeError, "Attribute", "attribute '" + e.name + "'", e.line);
      case NodeKind::kSubscript:
        return e.kid(1)->kind == NodeKind::kSlice ? source_code(e, "Slice") : source_code(e);
      default:
        return source_code(e);
    }
  }
};

}  // namespace

std::string_view category_name(Category category) {
  return kCategoryNames[static_cast<int>(category)];
}

std::optional<Category> parse_category(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::optional<std::string> TypeMapping::map_annotation(std::string_view python_name) {
  if (python_name == "int") return "long";
  if (python_name == "float") return "double";
  if (python_name == "bool") return "int";
  if (python_name == "str") return "char*";
  return std::nullopt;
}

ParseOutcome parse_python(std::string_view source) {
  ParseOutcome out;
  try {
    out.tree = py::parse_module(source);
  } catch (const py::SyntaxError& e) {
    out.failure = make(Category::kSyntaxError, "", e.what(), e.line());
  }
  return out;
}

std::optional<Failure> classify_unsupported(const py::Node& module) {
  return Checker{}.module(module);
}

TranspileResult transpile_function(std::string_view source, const TypeMapping& types) {
  TranspileResult result;
  auto parsed = parse_python(source);
  if (parsed.failure) {
    result.failure = std::move(parsed.failure);
    return result;
  }
  if (auto f = classify_unsupported(*parsed.tree)) {
    result.failure = std::move(f);
    return result;
  }
  try {
    result.c_source = emit_c(*parsed.tree, types);
    result.status = TranspileResult::Status::kOk;
  } catch (const EmitError& e) {
    result.failure = make(Category::kGeneric, "", e.what(), 0);
  }
  return result;
}

}  // namespace relbench::transpile
