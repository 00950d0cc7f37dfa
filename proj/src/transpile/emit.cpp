#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "literal.hpp"
#include "relbench/common/text.hpp"
#include "relbench/transpile/transpile.hpp"

namespace relbench::transpile {

using py::ConstKind;
using py::Node;
using py::NodeKind;

namespace {

const std::set<std::string, std::less<>> kCKeywords = {
    "auto",     "break",   "case",     "char",   "const",    "continue", "default",  "do",
    "double",   "else",    "enum",     "extern", "float",    "for",      "goto",     "if",
    "inline",   "int",     "long",     "register", "restrict", "return", "short",    "signed",
    "sizeof",   "static",  "struct",   "switch", "typedef",  "union",    "unsigned", "void",
    "volatile", "while",   "_Bool",    "_Complex", "_Imaginary", "main",
};

std::string c_name(const std::string& name) {
  if (kCKeywords.count(name)) return name + "_";
  return name;
}

constexpr int kPrimary = 100;
constexpr int kUnary = 90;
constexpr int kAnd = 40;
constexpr int kOr = 30;

int binop_prec(std::string_view op) {
  if (op == "Mult" || op == "Div" || op == "Mod") return 80;
  if (op == "Add" || op == "Sub") return 70;
  throw EmitError("unexpected binary operator " + std::string(op));
}

std::string_view binop_text(std::string_view op) {
  if (op == "Add") return "+";
  if (op == "Sub") return "-";
  if (op == "Mult") return "*";
  if (op == "Div") return "/";
  if (op == "Mod") return "%";
  throw EmitError("unexpected binary operator " + std::string(op));
}

std::pair<std::string_view, int> compare_op(std::string_view op) {
  if (op == "Lt") return {"<", 60};
  if (op == "LtE") return {"<=", 60};
  if (op == "Gt") return {">", 60};
  if (op == "GtE") return {">=", 60};
  if (op == "Eq") return {"==", 55};
  if (op == "NotEq") return {"!=", 55};
  throw EmitError("unexpected comparison operator " + std::string(op));
}

std::string c_string_literal(const std::string& value) {
  std::string out = "\"";
  for (unsigned char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\%03o", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out += "\"";
  return out;
}

struct Expr {
  std::string text;
  int prec;
};

class Emitter {
 public:
  explicit Emitter(const TypeMapping& types) : types_(types) {}

  std::string function(const Node& fn) {
    std::ostringstream out;
    const auto& body = fn.kid(3)->kids;
    std::size_t first = 0;
    if (!body.empty() && body[0]->kind == NodeKind::kExpr && body[0]->kid(0)->kind == NodeKind::kConstant &&
        body[0]->kid(0)->const_kind == ConstKind::kStr) {
      out << doc_comment(body[0]->kid(0)->value);
      first = 1;
    }

    out << return_type(*fn.kid(2)) << ' ' << c_name(fn.name) << '(';
    const auto& args = fn.kid(1)->kids;
    if (args.empty()) out << "void";
    for (std::size_t i = 0; i < args.size(); ++i) {
      const Node& arg = *args[i];
      std::string type = arg.kid(0)->empty() ? types_.default_type : annotation_type(*arg.kid(0));
      if (i) out << ", ";
      out << type << ' ' << c_name(arg.name);
      params_.insert(arg.name);
    }
    out << ") {\n";

    for (std::size_t i = first; i < body.size(); ++i) collect_locals(*body[i]);
    for (const auto& name : local_order_) {
      const auto& type = local_types_.at(name);
      out << "    " << (type.empty() ? types_.default_type : type) << ' ' << c_name(name) << ";\n";
    }
    for (std::size_t i = first; i < body.size(); ++i) stmt(*body[i], 1, out);
    out << "}\n";
    return out.str();
  }

 private:
  static std::string doc_comment(const std::string& doc) {
    std::vector<std::string> lines;
    for (auto& line : split(doc, '\n')) {
      std::string t(trim(line));
      std::string safe;
      for (std::size_t i = 0; i < t.size(); ++i) {
        safe.push_back(t[i]);
        if (t[i] == '*' && i + 1 < t.size() && t[i + 1] == '/') safe.push_back(' ');
      }
      lines.push_back(std::move(safe));
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
    if (lines.empty()) return {};
    if (lines.size() == 1) return "/* " + lines[0] + " */\n";
    std::string out = "/*\n";
    for (const auto& l : lines) out += l.empty() ? " *\n" : " * " + l + "\n";
    return out + " */\n";
  }

  std::string annotation_type(const Node& ann) const {
    if (ann.kind == NodeKind::kName) {
      if (auto t = TypeMapping::map_annotation(ann.name)) return *t;
    }
    throw EmitError("annotation without a C type");
  }

  std::string return_type(const Node& ann) const {
    if (ann.empty()) return types_.default_type;
    if (ann.kind == NodeKind::kConstant && ann.const_kind == ConstKind::kNone) return "void";
    return annotation_type(ann);
  }

  void declare(const std::string& name, const std::string& explicit_type) {
    if (params_.count(name)) return;
    auto it = local_types_.find(name);
    if (it == local_types_.end()) {
      local_order_.push_back(name);
      local_types_.emplace(name, explicit_type);
      return;
    }
    if (explicit_type.empty()) return;
    if (it->second.empty()) {
      it->second = explicit_type;
    } else if (it->second != explicit_type) {
      throw EmitError("conflicting types for local '" + name + "': " + it->second + " and " + explicit_type);
    }
  }

  void collect_locals(const Node& s) {
    switch (s.kind) {
      case NodeKind::kAssign:
        for (std::size_t i = 0; i + 1 < s.kids.size(); ++i) declare(s.kid(i)->name, {});
        break;
      case NodeKind::kAugAssign:
        declare(s.kid(0)->name, {});
        break;
      case NodeKind::kAnnAssign:
        declare(s.kid(0)->name, annotation_type(*s.kid(1)));
        break;
      case NodeKind::kFor:
        declare(s.kid(0)->name, "long");
        for (const auto& k : s.kid(2)->kids) collect_locals(*k);
        break;
      case NodeKind::kIf:
      case NodeKind::kWhile:
        for (const auto& k : s.kid(1)->kids) collect_locals(*k);
        for (const auto& k : s.kid(2)->kids) collect_locals(*k);
        break;
      default:
        break;
    }
  }

  static void indent(std::ostream& out, int depth) {
    for (int i = 0; i < depth; ++i) out << "    ";
  }

  void block(const Node& seq, int depth, std::ostream& out) {
    for (const auto& s : seq.kids) stmt(*s, depth, out);
  }

  void stmt(const Node& s, int depth, std::ostream& out) {
    switch (s.kind) {
      case NodeKind::kReturn:
        indent(out, depth);
        if (s.kid(0)->empty()) {
          out << "return;\n";
        } else {
          out << "return " << expr(*s.kid(0)).text << ";\n";
        }
        return;
      case NodeKind::kAssign:
        indent(out, depth);
        for (std::size_t i = 0; i + 1 < s.kids.size(); ++i) out << c_name(s.kid(i)->name) << " = ";
        out << expr(*s.kids.back()).text << ";\n";
        return;
      case NodeKind::kAugAssign:
        indent(out, depth);
        out << c_name(s.kid(0)->name) << ' ' << binop_text(s.op) << "= " << expr(*s.kid(1)).text << ";\n";
        return;
      case NodeKind::kAnnAssign:
        if (s.kid(2)->empty()) return;
        indent(out, depth);
        out << c_name(s.kid(0)->name) << " = " << expr(*s.kid(2)).text << ";\n";
        return;
      case NodeKind::kIf:
        indent(out, depth);
        if_chain(s, depth, out);
        return;
      case NodeKind::kWhile:
        indent(out, depth);
        out << "while (" << expr(*s.kid(0)).text << ") {\n";
        block(*s.kid(1), depth + 1, out);
        indent(out, depth);
        out << "}\n";
        return;
      case NodeKind::kFor:
        for_loop(s, depth, out);
        return;
      case NodeKind::kExpr:
        indent(out, depth);
        out << expr(*s.kid(0)).text << ";\n";
        return;
      case NodeKind::kPass:
        return;
      case NodeKind::kBreak:
        indent(out, depth);
        out << "break;\n";
        return;
      case NodeKind::kContinue:
        indent(out, depth);
        out << "continue;\n";
        return;
      default:
        throw EmitError("unexpected statement " + std::string(py::kind_name(s.kind)));
    }
  }

  // The caller has written the indentation for the first line.
  void if_chain(const Node& s, int depth, std::ostream& out) {
    out << "if (" << expr(*s.kid(0)).text << ") {\n";
    block(*s.kid(1), depth + 1, out);
    indent(out, depth);
    const auto& orelse = s.kid(2)->kids;
    if (orelse.empty()) {
      out << "}\n";
    } else if (orelse.size() == 1 && orelse[0]->kind == NodeKind::kIf) {
      out << "} else ";
      if_chain(*orelse[0], depth, out);
    } else {
      out << "} else {\n";
      block(*s.kid(2), depth + 1, out);
      indent(out, depth);
      out << "}\n";
    }
  }

  void for_loop(const Node& s, int depth, std::ostream& out) {
    const Node& iter = *s.kid(1);
    std::string var = c_name(s.kid(0)->name);
    std::string start = "0";
    std::string stop;
    std::string step;
    std::size_t nargs = iter.kids.size() - 1;
    if (nargs == 1) {
      stop = operand(*iter.kid(1), 61);
    } else {
      start = expr(*iter.kid(1)).text;
      stop = operand(*iter.kid(2), 61);
      if (nargs == 3) {
        auto v = int_literal_value(iter.kid(3)->value);
        if (!v || *v <= 0) throw EmitError("range() step is not a positive constant");
        if (*v != 1) step = std::to_string(*v);
      }
    }
    indent(out, depth);
    out << "for (" << var << " = " << start << "; " << var << " < " << stop << "; ";
    if (step.empty()) {
      out << var << "++";
    } else {
      out << var << " += " << step;
    }
    out << ") {\n";
    block(*s.kid(2), depth + 1, out);
    indent(out, depth);
    out << "}\n";
  }

  std::string operand(const Node& e, int min_prec) {
    Expr x = expr(e);
    if (x.prec < min_prec) return "(" + x.text + ")";
    return x.text;
  }

  Expr expr(const Node& e) {
    switch (e.kind) {
      case NodeKind::kName:
        return {c_name(e.name), kPrimary};
      case NodeKind::kConstant:
        return {constant(e), kPrimary};
      case NodeKind::kBinOp: {
        int p = binop_prec(e.op);
        std::string text = operand(*e.kid(0), p) + ' ' + std::string(binop_text(e.op)) + ' ' + operand(*e.kid(1), p + 1);
        return {std::move(text), p};
      }
      case NodeKind::kUnaryOp: {
        std::string inner = operand(*e.kid(0), kUnary);
        if (inner[0] == '-' || inner[0] == '+' || inner[0] == '!') inner = "(" + inner + ")";
        if (e.op == "Not") return {"!" + inner, kUnary};
        if (e.op == "USub") return {"-" + inner, kUnary};
        if (e.op == "UAdd") return {"+" + inner, kUnary};
        throw EmitError("unexpected unary operator " + e.op);
      }
      case NodeKind::kBoolOp: {
        bool is_and = e.op == "And";
        int p = is_and ? kAnd : kOr;
        std::string text;
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          if (i) text += is_and ? " && " : " || ";
          // && nested in || is parenthesized for readability.
          text += operand(*e.kid(i), is_and ? p : kAnd + 1);
        }
        return {std::move(text), p};
      }
      case NodeKind::kCompare:
        return compare(e);
      case NodeKind::kCall: {
        std::string text = c_name(e.kid(0)->name) + "(";
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          if (i > 1) text += ", ";
          text += expr(*e.kid(i)).text;
        }
        return {text + ")", kPrimary};
      }
      default:
        throw EmitError("unexpected expression " + std::string(py::kind_name(e.kind)));
    }
  }

  Expr compare(const Node& e) {
    std::vector<std::string> parts;
    int last_prec = 0;
    for (std::size_t i = 0; i < e.names.size(); ++i) {
      auto [op, p] = compare_op(e.names[i]);
      std::string text = operand(*e.kid(i), p) + ' ' + std::string(op) + ' ' + operand(*e.kid(i + 1), p + 1);
      parts.push_back(std::move(text));
      last_prec = p;
    }
    if (parts.size() == 1) return {parts[0], last_prec};
    std::string text;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) text += " && ";
      text += "(" + parts[i] + ")";
    }
    return {std::move(text), kAnd};
  }

  static std::string constant(const Node& e) {
    switch (e.const_kind) {
      case ConstKind::kTrue:
        return "1";
      case ConstKind::kFalse:
        return "0";
      case ConstKind::kInt: {
        auto v = int_literal_value(e.value);
        if (!v) throw EmitError("integer literal out of range");
        return std::to_string(*v);
      }
      case ConstKind::kFloat: {
        std::string text;
        for (char c : e.value) {
          if (c != '_') text.push_back(c);
        }
        return text;
      }
      case ConstKind::kStr:
        return c_string_literal(e.value);
      default:
        throw EmitError("unexpected constant");
    }
  }

  const TypeMapping& types_;
  std::set<std::string> params_;
  std::vector<std::string> local_order_;
  std::map<std::string, std::string> local_types_;
};

}  // namespace

std::string emit_c(const py::Node& module, const TypeMapping& types) {
  const Node* fn = nullptr;
  for (const auto& stmt : module.kids) {
    if (stmt->kind != NodeKind::kFunctionDef || fn) throw EmitError("expected exactly one top-level function");
    fn = stmt.get();
  }
  if (!fn) throw EmitError("expected exactly one top-level function");
  return Emitter(types).function(*fn);
}

}  // namespace relbench::transpile
