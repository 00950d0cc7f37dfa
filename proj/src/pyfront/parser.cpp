#include "relbench/pyfront/parser.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace relbench::py {

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kModule: return "Module";
    case NodeKind::kFunctionDef: return "FunctionDef";
    case NodeKind::kAsyncFunctionDef: return "AsyncFunctionDef";
    case NodeKind::kClassDef: return "ClassDef";
    case NodeKind::kReturn: return "Return";
    case NodeKind::kDelete: return "Delete";
    case NodeKind::kAssign: return "Assign";
    case NodeKind::kAugAssign: return "AugAssign";
    case NodeKind::kAnnAssign: return "AnnAssign";
    case NodeKind::kFor: return "For";
    case NodeKind::kAsyncFor: return "AsyncFor";
    case NodeKind::kWhile: return "While";
    case NodeKind::kIf: return "If";
    case NodeKind::kWith: return "With";
    case NodeKind::kAsyncWith: return "AsyncWith";
    case NodeKind::kRaise: return "Raise";
    case NodeKind::kTry: return "Try";
    case NodeKind::kAssert: return "Assert";
    case NodeKind::kImport: return "Import";
    case NodeKind::kImportFrom: return "ImportFrom";
    case NodeKind::kGlobal: return "Global";
    case NodeKind::kNonlocal: return "Nonlocal";
    case NodeKind::kExpr: return "Expr";
    case NodeKind::kPass: return "Pass";
    case NodeKind::kBreak: return "Break";
    case NodeKind::kContinue: return "Continue";
    case NodeKind::kBoolOp: return "BoolOp";
    case NodeKind::kNamedExpr: return "NamedExpr";
    case NodeKind::kBinOp: return "BinOp";
    case NodeKind::kUnaryOp: return "UnaryOp";
    case NodeKind::kLambda: return "Lambda";
    case NodeKind::kIfExp: return "IfExp";
    case NodeKind::kDict: return "Dict";
    case NodeKind::kSet: return "Set";
    case NodeKind::kListComp: return "ListComp";
    case NodeKind::kSetComp: return "SetComp";
    case NodeKind::kDictComp: return "DictComp";
    case NodeKind::kGeneratorExp: return "GeneratorExp";
    case NodeKind::kAwait: return "Await";
    case NodeKind::kYield: return "Yield";
    case NodeKind::kYieldFrom: return "YieldFrom";
    case NodeKind::kCompare: return "Compare";
    case NodeKind::kCall: return "Call";
    case NodeKind::kJoinedStr: return "JoinedStr";
    case NodeKind::kConstant: return "Constant";
    case NodeKind::kAttribute: return "Attribute";
    case NodeKind::kSubscript: return "Subscript";
    case NodeKind::kStarred: return "Starred";
    case NodeKind::kName: return "Name";
    case NodeKind::kList: return "List";
    case NodeKind::kTuple: return "Tuple";
    case NodeKind::kSlice: return "Slice";
    case NodeKind::kArguments: return "arguments";
    case NodeKind::kArg: return "arg";
    case NodeKind::kKeyword: return "keyword";
    case NodeKind::kComprehension: return "comprehension";
    case NodeKind::kExceptHandler: return "ExceptHandler";
    case NodeKind::kWithItem: return "withitem";
    case NodeKind::kAlias: return "alias";
    case NodeKind::kSeq: return "Seq";
    case NodeKind::kEmpty: return "Empty";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

const char* binop_name(std::string_view op) {
  if (op == "+") return "Add";
  if (op == "-") return "Sub";
  if (op == "*") return "Mult";
  if (op == "@") return "MatMult";
  if (op == "/") return "Div";
  if (op == "%") return "Mod";
  if (op == "**") return "Pow";
  if (op == "<<") return "LShift";
  if (op == ">>") return "RShift";
  if (op == "|") return "BitOr";
  if (op == "^") return "BitXor";
  if (op == "&") return "BitAnd";
  if (op == "//") return "FloorDiv";
  return nullptr;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  NodePtr parse_file() {
    auto mod = std::make_unique<Node>();
    mod->kind = NodeKind::kModule;
    mod->line = 1;
    while (!at(TokenKind::kEnd)) {
      if (at(TokenKind::kNewline)) {
        advance();
        continue;
      }
      parse_statement(mod->kids);
    }
    if (!mod->kids.empty()) {
      mod->end_line = mod->kids.back()->end_line;
      mod->end = mod->kids.back()->end;
    }
    return mod;
  }

 private:
  // ---- token helpers ----
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }
  bool at_op(std::string_view op, std::size_t k = 0) const {
    return peek(k).kind == TokenKind::kOp && peek(k).text == op;
  }
  bool at_kw(std::string_view kw, std::size_t k = 0) const {
    return peek(k).kind == TokenKind::kName && peek(k).text == kw;
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::kNewline && t.kind != TokenKind::kIndent &&
        t.kind != TokenKind::kDedent && t.kind != TokenKind::kEnd) {
      last_ = &t;
    }
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().line); }
  [[noreturn]] void fail_unexpected() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kIndent: fail("unexpected indent");
      case TokenKind::kDedent: fail("unexpected unindent");
      case TokenKind::kEnd: fail("unexpected EOF while parsing");
      case TokenKind::kNewline: fail("invalid syntax (unexpected newline)");
      default: fail("invalid syntax near '" + t.text + "'");
    }
  }
  void expect_op(std::string_view op) {
    if (!at_op(op)) fail_unexpected();
    advance();
  }
  void expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail_unexpected();
    advance();
  }
  std::string expect_name() {
    if (!at(TokenKind::kName) || is_keyword(peek().text)) fail_unexpected();
    return advance().text;
  }

  NodePtr make(NodeKind kind, const Token& start) const {
    auto n = std::make_unique<Node>();
    n->kind = kind;
    n->line = start.line;
    n->col = start.col;
    n->begin = start.begin;
    n->end_line = start.end_line;
    n->end = start.end;
    return n;
  }
  NodePtr make_at(NodeKind kind, const Node& start) const {
    auto n = std::make_unique<Node>();
    n->kind = kind;
    n->line = start.line;
    n->col = start.col;
    n->begin = start.begin;
    return n;
  }
  NodePtr finish(NodePtr n) const {
    if (last_ != nullptr) {
      n->end_line = std::max(n->line, last_->end_line);
      n->end = std::max(n->begin, last_->end);
    }
    return n;
  }
  NodePtr empty() const {
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::kEmpty;
    n->line = peek().line;
    n->begin = peek().begin;
    n->end = peek().begin;
    n->end_line = peek().line;
    return n;
  }
  NodePtr seq(std::vector<NodePtr> items) const {
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::kSeq;
    if (!items.empty()) {
      n->line = items.front()->line;
      n->begin = items.front()->begin;
      n->end_line = items.back()->end_line;
      n->end = items.back()->end;
    } else {
      n->line = peek().line;
      n->begin = peek().begin;
      n->end = peek().begin;
      n->end_line = peek().line;
    }
    n->kids = std::move(items);
    return n;
  }

  bool can_start_expr() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kName:
        return !is_keyword(t.text) || t.text == "None" || t.text == "True" ||
               t.text == "False" || t.text == "not" || t.text == "lambda" || t.text == "await";
      case TokenKind::kOp:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "..." || t.text == "*";
      default:
        return false;
    }
  }

  // ---- statements ----
  void parse_statement(std::vector<NodePtr>& out) {
    if (at(TokenKind::kIndent)) fail("unexpected indent");
    if (at(TokenKind::kName)) {
      const std::string& w = peek().text;
      if (w == "if") return out.push_back(parse_if());
      if (w == "while") return out.push_back(parse_while());
      if (w == "for") return out.push_back(parse_for(false));
      if (w == "try") return out.push_back(parse_try());
      if (w == "with") return out.push_back(parse_with(false));
      if (w == "def") return out.push_back(parse_funcdef(seq({}), false));
      if (w == "class") return out.push_back(parse_classdef(seq({})));
      if (w == "async") return out.push_back(parse_async(seq({})));
    }
    if (at_op("@")) return out.push_back(parse_decorated());
    parse_simple_statements(out);
  }

  void parse_simple_statements(std::vector<NodePtr>& out) {
    out.push_back(parse_small_statement());
    while (at_op(";")) {
      advance();
      if (at(TokenKind::kNewline)) break;
      out.push_back(parse_small_statement());
    }
    if (!at(TokenKind::kNewline)) fail_unexpected();
    advance();
  }

  NodePtr parse_block() {
    expect_op(":");
    std::vector<NodePtr> body;
    if (at(TokenKind::kNewline)) {
      advance();
      if (!at(TokenKind::kIndent)) fail("expected an indented block");
      advance();
      while (!at(TokenKind::kDedent) && !at(TokenKind::kEnd)) parse_statement(body);
      if (at(TokenKind::kDedent)) advance();
    } else {
      parse_simple_statements(body);
    }
    return seq(std::move(body));
  }

  NodePtr parse_small_statement() {
    const Token& start = peek();
    if (at(TokenKind::kName)) {
      const std::string w = start.text;
      if (w == "pass" || w == "break" || w == "continue") {
        advance();
        return finish(make(w == "pass" ? NodeKind::kPass
                                       : (w == "break" ? NodeKind::kBreak : NodeKind::kContinue),
                           start));
      }
      if (w == "return") {
        advance();
        auto n = make(NodeKind::kReturn, start);
        n->kids.push_back(can_start_expr() ? parse_testlist_star_expr() : empty());
        return finish(std::move(n));
      }
      if (w == "raise") {
        advance();
        auto n = make(NodeKind::kRaise, start);
        if (can_start_expr()) {
          n->kids.push_back(parse_test());
          if (at_kw("from")) {
            advance();
            n->kids.push_back(parse_test());
          } else {
            n->kids.push_back(empty());
          }
        } else {
          n->kids.push_back(empty());
          n->kids.push_back(empty());
        }
        return finish(std::move(n));
      }
      if (w == "global" || w == "nonlocal") {
        advance();
        auto n = make(w == "global" ? NodeKind::kGlobal : NodeKind::kNonlocal, start);
        n->names.push_back(expect_name());
        while (at_op(",")) {
          advance();
          n->names.push_back(expect_name());
        }
        return finish(std::move(n));
      }
      if (w == "del") {
        advance();
        auto n = make(NodeKind::kDelete, start);
        auto targets = parse_exprlist();
        check_del_target(*targets);
        if (targets->kind == NodeKind::kTuple && tuple_is_bare_) {
          for (auto& k : targets->kids) n->kids.push_back(std::move(k));
        } else {
          n->kids.push_back(std::move(targets));
        }
        return finish(std::move(n));
      }
      if (w == "assert") {
        advance();
        auto n = make(NodeKind::kAssert, start);
        n->kids.push_back(parse_test());
        if (at_op(",")) {
          advance();
          n->kids.push_back(parse_test());
        } else {
          n->kids.push_back(empty());
        }
        return finish(std::move(n));
      }
      if (w == "import") return parse_import();
      if (w == "from") return parse_import_from();
    }
    return parse_expr_statement();
  }

  NodePtr parse_import() {
    const Token& start = advance();
    auto n = make(NodeKind::kImport, start);
    do {
      if (at_op(",")) advance();
      const Token& at_tok = peek();
      auto alias = make(NodeKind::kAlias, at_tok);
      alias->name = parse_dotted_name();
      if (at_kw("as")) {
        advance();
        alias->value = expect_name();
      }
      n->kids.push_back(finish(std::move(alias)));
    } while (at_op(","));
    return finish(std::move(n));
  }

  std::string parse_dotted_name() {
    std::string name = expect_name();
    while (at_op(".")) {
      advance();
      name += "." + expect_name();
    }
    return name;
  }

  NodePtr parse_import_from() {
    const Token& start = advance();
    auto n = make(NodeKind::kImportFrom, start);
    std::string module;
    while (at_op(".") || at_op("...")) module += advance().text;
    if (!at_kw("import")) module += parse_dotted_name();
    n->name = module;
    expect_kw("import");
    if (at_op("*")) {
      auto alias = make(NodeKind::kAlias, peek());
      advance();
      alias->name = "*";
      n->kids.push_back(finish(std::move(alias)));
      return finish(std::move(n));
    }
    bool paren = at_op("(");
    if (paren) advance();
    while (true) {
      auto alias = make(NodeKind::kAlias, peek());
      alias->name = expect_name();
      if (at_kw("as")) {
        advance();
        alias->value = expect_name();
      }
      n->kids.push_back(finish(std::move(alias)));
      if (!at_op(",")) break;
      advance();
      if (paren && at_op(")")) break;
      if (!paren && !at(TokenKind::kName)) fail("trailing comma not allowed without surrounding parentheses");
    }
    if (paren) expect_op(")");
    return finish(std::move(n));
  }

  static bool is_augassign(const Token& t) {
    static constexpr std::array<std::string_view, 13> kOps = {
        "+=", "-=", "*=", "@=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", "**=", "//="};
    return t.kind == TokenKind::kOp && std::find(kOps.begin(), kOps.end(), t.text) != kOps.end();
  }

  NodePtr parse_expr_statement() {
    const Token& start = peek();
    NodePtr first = at_kw("yield") ? parse_yield_expr() : parse_testlist_star_expr();
    if (at_op(":")) {
      advance();
      check_single_target(*first, "annotated");
      auto n = make_at(NodeKind::kAnnAssign, *first);
      n->kids.push_back(std::move(first));
      n->kids.push_back(parse_test());
      if (at_op("=")) {
        advance();
        n->kids.push_back(at_kw("yield") ? parse_yield_expr() : parse_testlist_star_expr());
      } else {
        n->kids.push_back(empty());
      }
      return finish(std::move(n));
    }
    if (is_augassign(peek())) {
      std::string op_text = advance().text;
      op_text.pop_back();
      check_single_target(*first, "augmented");
      auto n = make_at(NodeKind::kAugAssign, *first);
      n->op = binop_name(op_text);
      n->kids.push_back(std::move(first));
      n->kids.push_back(at_kw("yield") ? parse_yield_expr() : parse_testlist());
      return finish(std::move(n));
    }
    if (at_op("=")) {
      auto n = make_at(NodeKind::kAssign, *first);
      n->kids.push_back(std::move(first));
      while (at_op("=")) {
        advance();
        n->kids.push_back(at_kw("yield") ? parse_yield_expr() : parse_testlist_star_expr());
      }
      for (std::size_t i = 0; i + 1 < n->kids.size(); ++i) check_target(*n->kids[i]);
      reject_bare_starred(*n->kids.back());
      return finish(std::move(n));
    }
    reject_bare_starred(*first);
    auto n = make(NodeKind::kExpr, start);
    n->kids.push_back(std::move(first));
    return finish(std::move(n));
  }

  void reject_bare_starred(const Node& n) const {
    if (n.kind == NodeKind::kStarred) throw SyntaxError("can't use starred expression here", n.line);
  }

  void check_target(const Node& n) const {
    switch (n.kind) {
      case NodeKind::kName:
      case NodeKind::kAttribute:
      case NodeKind::kSubscript:
        return;
      case NodeKind::kStarred:
        check_target(*n.kids[0]);
        return;
      case NodeKind::kTuple:
      case NodeKind::kList: {
        int starred = 0;
        for (const auto& k : n.kids) {
          if (k->kind == NodeKind::kStarred) ++starred;
          check_target(*k);
        }
        if (starred > 1) throw SyntaxError("multiple starred expressions in assignment", n.line);
        return;
      }
      default:
        throw SyntaxError("cannot assign to " + std::string(kind_name(n.kind)), n.line);
    }
  }

  void check_single_target(const Node& n, const char* what) const {
    if (n.kind != NodeKind::kName && n.kind != NodeKind::kAttribute &&
        n.kind != NodeKind::kSubscript) {
      throw SyntaxError(std::string("illegal target for ") + what + " assignment", n.line);
    }
  }

  void check_del_target(const Node& n) const {
    switch (n.kind) {
      case NodeKind::kName:
      case NodeKind::kAttribute:
      case NodeKind::kSubscript:
        return;
      case NodeKind::kTuple:
      case NodeKind::kList:
        for (const auto& k : n.kids) check_del_target(*k);
        return;
      default:
        throw SyntaxError("cannot delete " + std::string(kind_name(n.kind)), n.line);
    }
  }

  NodePtr parse_if() {
    const Token& start = advance();
    auto n = make(NodeKind::kIf, start);
    n->kids.push_back(parse_namedexpr_test());
    n->kids.push_back(parse_block());
    if (at_kw("elif")) {
      std::vector<NodePtr> orelse;
      orelse.push_back(parse_if());
      n->kids.push_back(seq(std::move(orelse)));
    } else if (at_kw("else")) {
      advance();
      n->kids.push_back(parse_block());
    } else {
      n->kids.push_back(seq({}));
    }
    return finish(std::move(n));
  }

  NodePtr parse_while() {
    const Token& start = advance();
    auto n = make(NodeKind::kWhile, start);
    n->kids.push_back(parse_namedexpr_test());
    n->kids.push_back(parse_block());
    if (at_kw("else")) {
      advance();
      n->kids.push_back(parse_block());
    } else {
      n->kids.push_back(seq({}));
    }
    return finish(std::move(n));
  }

  NodePtr parse_for(bool is_async) {
    const Token& start = is_async ? *last_ : peek();
    expect_kw("for");
    auto n = make(is_async ? NodeKind::kAsyncFor : NodeKind::kFor, start);
    auto target = parse_exprlist();
    check_target(*target);
    n->kids.push_back(std::move(target));
    expect_kw("in");
    n->kids.push_back(parse_testlist_star_expr());
    n->kids.push_back(parse_block());
    if (at_kw("else")) {
      advance();
      n->kids.push_back(parse_block());
    } else {
      n->kids.push_back(seq({}));
    }
    return finish(std::move(n));
  }

  NodePtr parse_try() {
    const Token& start = advance();
    auto n = make(NodeKind::kTry, start);
    n->kids.push_back(parse_block());
    std::vector<NodePtr> handlers;
    bool saw_bare = false;
    while (at_kw("except")) {
      if (saw_bare) fail("default 'except:' must be last");
      const Token& h = advance();
      auto handler = make(NodeKind::kExceptHandler, h);
      if (at_op(":")) {
        saw_bare = true;
        handler->kids.push_back(empty());
      } else {
        handler->kids.push_back(parse_test());
        if (at_kw("as")) {
          advance();
          handler->name = expect_name();
        }
      }
      handler->kids.push_back(parse_block());
      handlers.push_back(finish(std::move(handler)));
    }
    const bool had_handlers = !handlers.empty();
    n->kids.push_back(seq(std::move(handlers)));
    if (at_kw("else")) {
      if (!had_handlers) fail_unexpected();
      advance();
      n->kids.push_back(parse_block());
    } else {
      n->kids.push_back(seq({}));
    }
    if (at_kw("finally")) {
      advance();
      n->kids.push_back(parse_block());
    } else {
      if (!had_handlers) fail("expected 'except' or 'finally' block");
      n->kids.push_back(seq({}));
    }
    return finish(std::move(n));
  }

  NodePtr parse_with(bool is_async) {
    const Token& start = is_async ? *last_ : peek();
    expect_kw("with");
    auto n = make(is_async ? NodeKind::kAsyncWith : NodeKind::kWith, start);
    if (at_op("(")) {
      // Parenthesized item list; on failure re-parse the parenthesis as an expression.
      const std::size_t save = pos_;
      const Token* save_last = last_;
      try {
        advance();
        std::vector<NodePtr> items;
        while (!at_op(")")) {
          items.push_back(parse_with_item());
          if (!at_op(",")) break;
          advance();
        }
        expect_op(")");
        if (!at_op(":") || items.empty()) fail_unexpected();
        for (auto& item : items) n->kids.push_back(std::move(item));
        n->kids.push_back(parse_block());
        return finish(std::move(n));
      } catch (const SyntaxError&) {
        pos_ = save;
        last_ = save_last;
      }
    }
    do {
      if (at_op(",")) advance();
      n->kids.push_back(parse_with_item());
    } while (at_op(","));
    n->kids.push_back(parse_block());
    return finish(std::move(n));
  }

  NodePtr parse_with_item() {
    auto item = make(NodeKind::kWithItem, peek());
    item->kids.push_back(parse_test());
    if (at_kw("as")) {
      advance();
      auto target = parse_expr();
      check_target(*target);
      item->kids.push_back(std::move(target));
    } else {
      item->kids.push_back(empty());
    }
    return finish(std::move(item));
  }

  NodePtr parse_decorated() {
    std::vector<NodePtr> decorators;
    while (at_op("@")) {
      advance();
      decorators.push_back(parse_namedexpr_test());
      if (!at(TokenKind::kNewline)) fail_unexpected();
      advance();
    }
    auto decs = seq(std::move(decorators));
    if (at_kw("def")) return parse_funcdef(std::move(decs), false);
    if (at_kw("class")) return parse_classdef(std::move(decs));
    if (at_kw("async")) return parse_async(std::move(decs));
    fail_unexpected();
  }

  NodePtr parse_async(NodePtr decorators) {
    advance();
    if (at_kw("def")) return parse_funcdef(std::move(decorators), true);
    if (!decorators->kids.empty()) fail_unexpected();
    if (at_kw("for")) return parse_for(true);
    if (at_kw("with")) return parse_with(true);
    fail_unexpected();
  }

  NodePtr parse_funcdef(NodePtr decorators, bool is_async) {
    const Token& start = is_async ? *last_ : peek();
    expect_kw("def");
    auto n = make(is_async ? NodeKind::kAsyncFunctionDef : NodeKind::kFunctionDef, start);
    n->name = expect_name();
    expect_op("(");
    auto args = parse_parameters(")", true);
    expect_op(")");
    NodePtr returns = empty();
    if (at_op("->")) {
      advance();
      returns = parse_test();
    }
    n->kids.push_back(std::move(decorators));
    n->kids.push_back(std::move(args));
    n->kids.push_back(std::move(returns));
    n->kids.push_back(parse_block());
    return finish(std::move(n));
  }

  NodePtr parse_classdef(NodePtr decorators) {
    const Token& start = advance();
    auto n = make(NodeKind::kClassDef, start);
    n->name = expect_name();
    std::vector<NodePtr> bases;
    if (at_op("(")) {
      advance();
      parse_call_arguments(bases);
      expect_op(")");
    }
    n->kids.push_back(std::move(decorators));
    n->kids.push_back(seq(std::move(bases)));
    n->kids.push_back(parse_block());
    return finish(std::move(n));
  }

  // Parameter list up to `closer`; lambdas pass annotated=false.
  NodePtr parse_parameters(std::string_view closer, bool annotated) {
    auto args = make(NodeKind::kArguments, peek());
    bool seen_default = false;
    bool seen_star = false;
    bool seen_kwarg = false;
    bool seen_slash = false;
    bool bare_star_pending = false;
    while (!at_op(closer)) {
      if (seen_kwarg) fail("arguments cannot follow var-keyword argument");
      const Token& t = peek();
      if (at_op("/")) {
        if (seen_slash || seen_star || args->kids.empty()) fail("invalid syntax at '/'");
        advance();
        seen_slash = true;
        for (auto& a : args->kids) a->op = "posonly";
      } else if (at_op("*")) {
        if (seen_star) fail("* argument may appear only once");
        advance();
        seen_star = true;
        if (at_op(",") || at_op(closer)) {
          bare_star_pending = true;
        } else {
          args->kids.push_back(parse_param(t, "vararg", annotated, false));
        }
      } else if (at_op("**")) {
        advance();
        args->kids.push_back(parse_param(t, "kwarg", annotated, false));
        seen_kwarg = true;
      } else {
        auto p = parse_param(t, seen_star ? "kwonly" : "pos", annotated, true);
        if (!seen_star) {
          if (!p->kids[1]->empty()) {
            seen_default = true;
          } else if (seen_default) {
            fail("non-default argument follows default argument");
          }
        }
        bare_star_pending = false;
        args->kids.push_back(std::move(p));
      }
      if (!at_op(",")) break;
      advance();
    }
    if (bare_star_pending) fail("named arguments must follow bare *");
    return finish(std::move(args));
  }

  NodePtr parse_param(const Token& start, const char* kind, bool annotated, bool allow_default) {
    auto p = make(NodeKind::kArg, start);
    p->op = kind;
    p->name = expect_name();
    if (annotated && at_op(":")) {
      advance();
      p->kids.push_back(parse_test());
    } else {
      p->kids.push_back(empty());
    }
    if (allow_default && at_op("=")) {
      advance();
      p->kids.push_back(parse_test());
    } else {
      p->kids.push_back(empty());
    }
    return finish(std::move(p));
  }

  // ---- expressions ----
  NodePtr parse_yield_expr() {
    const Token& start = advance();
    if (at_kw("from")) {
      advance();
      auto n = make(NodeKind::kYieldFrom, start);
      n->kids.push_back(parse_test());
      return finish(std::move(n));
    }
    auto n = make(NodeKind::kYield, start);
    n->kids.push_back(can_start_expr() ? parse_testlist_star_expr() : empty());
    return finish(std::move(n));
  }

  // test or star_expr separated by commas; a trailing comma or more than one
  // element makes a Tuple.
  NodePtr parse_testlist_star_expr() { return parse_list_of([this] { return parse_test_or_star(); }); }
  NodePtr parse_testlist() { return parse_list_of([this] { return parse_test(); }); }
  NodePtr parse_exprlist() { return parse_list_of([this] { return parse_expr_or_star(); }); }

  template <typename ElementFn>
  NodePtr parse_list_of(ElementFn element) {
    NodePtr first = element();
    tuple_is_bare_ = false;
    if (!at_op(",")) return first;
    auto tuple = make_at(NodeKind::kTuple, *first);
    tuple->kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (!can_start_expr()) break;
      tuple->kids.push_back(element());
    }
    tuple_is_bare_ = true;
    return finish(std::move(tuple));
  }

  NodePtr parse_test_or_star() {
    if (at_op("*")) return parse_star_expr();
    return parse_test();
  }
  NodePtr parse_expr_or_star() {
    if (at_op("*")) return parse_star_expr();
    return parse_expr();
  }
  NodePtr parse_namedexpr_or_star() {
    if (at_op("*")) return parse_star_expr();
    return parse_namedexpr_test();
  }

  NodePtr parse_star_expr() {
    const Token& start = advance();
    auto n = make(NodeKind::kStarred, start);
    n->kids.push_back(parse_expr());
    return finish(std::move(n));
  }

  NodePtr parse_namedexpr_test() {
    NodePtr t = parse_test();
    if (at_op(":=")) {
      if (t->kind != NodeKind::kName) fail("cannot use assignment expressions with this target");
      advance();
      auto n = make_at(NodeKind::kNamedExpr, *t);
      n->kids.push_back(std::move(t));
      n->kids.push_back(parse_test());
      return finish(std::move(n));
    }
    return t;
  }

  NodePtr parse_test() {
    if (at_kw("lambda")) return parse_lambda(false);
    NodePtr body = parse_or_test();
    if (at_kw("if")) {
      advance();
      auto n = make_at(NodeKind::kIfExp, *body);
      n->kids.push_back(std::move(body));
      n->kids.push_back(parse_or_test());
      expect_kw("else");
      n->kids.push_back(parse_test());
      return finish(std::move(n));
    }
    return body;
  }

  NodePtr parse_test_nocond() {
    if (at_kw("lambda")) return parse_lambda(true);
    return parse_or_test();
  }

  NodePtr parse_lambda(bool nocond) {
    const Token& start = advance();
    auto n = make(NodeKind::kLambda, start);
    n->kids.push_back(parse_parameters(":", false));
    expect_op(":");
    n->kids.push_back(nocond ? parse_test_nocond() : parse_test());
    return finish(std::move(n));
  }

  NodePtr parse_or_test() { return parse_boolop("or", "Or", [this] { return parse_and_test(); }); }
  NodePtr parse_and_test() { return parse_boolop("and", "And", [this] { return parse_not_test(); }); }

  template <typename Fn>
  NodePtr parse_boolop(std::string_view kw, const char* name, Fn operand) {
    NodePtr first = operand();
    if (!at_kw(kw)) return first;
    auto n = make_at(NodeKind::kBoolOp, *first);
    n->op = name;
    n->kids.push_back(std::move(first));
    while (at_kw(kw)) {
      advance();
      n->kids.push_back(operand());
    }
    return finish(std::move(n));
  }

  NodePtr parse_not_test() {
    if (at_kw("not")) {
      const Token& start = advance();
      auto n = make(NodeKind::kUnaryOp, start);
      n->op = "Not";
      n->kids.push_back(parse_not_test());
      return finish(std::move(n));
    }
    return parse_comparison();
  }

  const char* comparison_op() {
    if (peek().kind == TokenKind::kOp) {
      const std::string& t = peek().text;
      const char* name = nullptr;
      if (t == "<") name = "Lt";
      else if (t == ">") name = "Gt";
      else if (t == "==") name = "Eq";
      else if (t == ">=") name = "GtE";
      else if (t == "<=") name = "LtE";
      else if (t == "!=") name = "NotEq";
      if (name != nullptr) advance();
      return name;
    }
    if (at_kw("in")) {
      advance();
      return "In";
    }
    if (at_kw("not") && at_kw("in", 1)) {
      advance();
      advance();
      return "NotIn";
    }
    if (at_kw("is")) {
      advance();
      if (at_kw("not")) {
        advance();
        return "IsNot";
      }
      return "Is";
    }
    return nullptr;
  }

  NodePtr parse_comparison() {
    NodePtr left = parse_expr();
    const char* op = comparison_op();
    if (op == nullptr) return left;
    auto n = make_at(NodeKind::kCompare, *left);
    n->kids.push_back(std::move(left));
    while (op != nullptr) {
      n->names.emplace_back(op);
      n->kids.push_back(parse_expr());
      op = comparison_op();
    }
    return finish(std::move(n));
  }

  template <typename Fn>
  NodePtr parse_binary(std::initializer_list<std::string_view> ops, Fn operand) {
    NodePtr left = operand();
    while (peek().kind == TokenKind::kOp &&
           std::find(ops.begin(), ops.end(), std::string_view(peek().text)) != ops.end()) {
      std::string op = advance().text;
      auto n = make_at(NodeKind::kBinOp, *left);
      n->op = binop_name(op);
      n->kids.push_back(std::move(left));
      n->kids.push_back(operand());
      left = finish(std::move(n));
    }
    return left;
  }

  NodePtr parse_expr() { return parse_binary({"|"}, [this] { return parse_xor(); }); }
  NodePtr parse_xor() { return parse_binary({"^"}, [this] { return parse_and(); }); }
  NodePtr parse_and() { return parse_binary({"&"}, [this] { return parse_shift(); }); }
  NodePtr parse_shift() { return parse_binary({"<<", ">>"}, [this] { return parse_arith(); }); }
  NodePtr parse_arith() { return parse_binary({"+", "-"}, [this] { return parse_term(); }); }
  NodePtr parse_term() {
    return parse_binary({"*", "@", "/", "%", "//"}, [this] { return parse_factor(); });
  }

  NodePtr parse_factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      const Token& start = advance();
      auto n = make(NodeKind::kUnaryOp, start);
      n->op = start.text == "+" ? "UAdd" : (start.text == "-" ? "USub" : "Invert");
      n->kids.push_back(parse_factor());
      return finish(std::move(n));
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base;
    if (at_kw("await")) {
      const Token& start = advance();
      auto n = make(NodeKind::kAwait, start);
      n->kids.push_back(parse_atom_expr());
      base = finish(std::move(n));
    } else {
      base = parse_atom_expr();
    }
    if (at_op("**")) {
      advance();
      auto n = make_at(NodeKind::kBinOp, *base);
      n->op = "Pow";
      n->kids.push_back(std::move(base));
      n->kids.push_back(parse_factor());
      return finish(std::move(n));
    }
    return base;
  }

  NodePtr parse_atom_expr() {
    NodePtr node = parse_atom();
    while (true) {
      if (at_op("(")) {
        advance();
        auto call = make_at(NodeKind::kCall, *node);
        call->kids.push_back(std::move(node));
        parse_call_arguments(call->kids);
        expect_op(")");
        node = finish(std::move(call));
      } else if (at_op("[")) {
        advance();
        auto sub = make_at(NodeKind::kSubscript, *node);
        sub->kids.push_back(std::move(node));
        sub->kids.push_back(parse_subscript_list());
        expect_op("]");
        node = finish(std::move(sub));
      } else if (at_op(".")) {
        advance();
        auto attr = make_at(NodeKind::kAttribute, *node);
        attr->kids.push_back(std::move(node));
        attr->name = expect_name();
        node = finish(std::move(attr));
      } else {
        return node;
      }
    }
  }

  void parse_call_arguments(std::vector<NodePtr>& out) {
    bool seen_keyword = false;
    bool seen_kw_unpack = false;
    std::size_t first_arg = out.size();
    while (!at_op(")")) {
      const Token& start = peek();
      if (at_op("*")) {
        if (seen_kw_unpack) fail("iterable argument unpacking follows keyword argument unpacking");
        advance();
        auto star = make(NodeKind::kStarred, start);
        star->kids.push_back(parse_test());
        out.push_back(finish(std::move(star)));
      } else if (at_op("**")) {
        advance();
        auto kw = make(NodeKind::kKeyword, start);
        kw->kids.push_back(parse_test());
        out.push_back(finish(std::move(kw)));
        seen_kw_unpack = true;
      } else {
        NodePtr value = parse_test();
        if (at_op("=")) {
          if (value->kind != NodeKind::kName) fail("expression cannot contain assignment, perhaps you meant \"==\"?");
          advance();
          auto kw = make_at(NodeKind::kKeyword, *value);
          kw->name = value->name;
          kw->kids.push_back(parse_test());
          out.push_back(finish(std::move(kw)));
          seen_keyword = true;
        } else if (at_op(":=")) {
          if (value->kind != NodeKind::kName) fail("cannot use assignment expressions with this target");
          advance();
          auto n = make_at(NodeKind::kNamedExpr, *value);
          n->kids.push_back(std::move(value));
          n->kids.push_back(parse_test());
          if (seen_keyword || seen_kw_unpack) fail("positional argument follows keyword argument");
          out.push_back(finish(std::move(n)));
        } else if (at_kw("for") || at_kw("async")) {
          auto gen = make_at(NodeKind::kGeneratorExp, *value);
          gen->kids.push_back(std::move(value));
          parse_comp_for(gen->kids);
          out.push_back(finish(std::move(gen)));
          if (out.size() - first_arg > 1 || at_op(",")) fail("Generator expression must be parenthesized");
        } else {
          if (seen_kw_unpack) fail("positional argument follows keyword argument unpacking");
          if (seen_keyword) fail("positional argument follows keyword argument");
          out.push_back(std::move(value));
        }
      }
      if (!at_op(",")) break;
      advance();
    }
  }

  NodePtr parse_subscript_list() {
    NodePtr first = parse_subscript();
    if (!at_op(",")) return first;
    auto tuple = make_at(NodeKind::kTuple, *first);
    tuple->kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_op("]")) break;
      tuple->kids.push_back(parse_subscript());
    }
    return finish(std::move(tuple));
  }

  NodePtr parse_subscript() {
    const Token& start = peek();
    NodePtr lower = at_op(":") ? nullptr : parse_test();
    if (!at_op(":")) return lower;
    auto slice = lower ? make_at(NodeKind::kSlice, *lower) : make(NodeKind::kSlice, start);
    slice->kids.push_back(lower ? std::move(lower) : empty());
    advance();
    slice->kids.push_back((at_op(":") || at_op("]") || at_op(",")) ? empty() : parse_test());
    if (at_op(":")) {
      advance();
      slice->kids.push_back((at_op("]") || at_op(",")) ? empty() : parse_test());
    } else {
      slice->kids.push_back(empty());
    }
    return finish(std::move(slice));
  }

  void parse_comp_for(std::vector<NodePtr>& out) {
    while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
      const Token& start = peek();
      auto comp = make(NodeKind::kComprehension, start);
      if (at_kw("async")) {
        advance();
        comp->op = "async";
      }
      expect_kw("for");
      auto target = parse_exprlist();
      check_target(*target);
      comp->kids.push_back(std::move(target));
      expect_kw("in");
      comp->kids.push_back(parse_or_test());
      while (at_kw("if")) {
        advance();
        comp->kids.push_back(parse_test_nocond());
      }
      out.push_back(finish(std::move(comp)));
    }
  }

  NodePtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kName: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          advance();
          auto n = make(NodeKind::kConstant, t);
          n->const_kind = t.text == "None" ? ConstKind::kNone
                                           : (t.text == "True" ? ConstKind::kTrue : ConstKind::kFalse);
          n->value = t.text;
          return finish(std::move(n));
        }
        if (is_keyword(t.text)) fail_unexpected();
        advance();
        auto n = make(NodeKind::kName, t);
        n->name = t.text;
        return finish(std::move(n));
      }
      case TokenKind::kNumber: {
        advance();
        auto n = make(NodeKind::kConstant, t);
        const std::string& s = t.text;
        const bool hex = s.size() > 1 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
        if (s.back() == 'j' || s.back() == 'J') {
          n->const_kind = ConstKind::kComplex;
        } else if (!hex && (s.find('.') != std::string::npos || s.find_first_of("eE") != std::string::npos)) {
          n->const_kind = ConstKind::kFloat;
        } else {
          n->const_kind = ConstKind::kInt;
        }
        n->value = s;
        return finish(std::move(n));
      }
      case TokenKind::kString:
        return parse_strings();
      case TokenKind::kOp:
        if (t.text == "(") return parse_paren();
        if (t.text == "[") return parse_list_display();
        if (t.text == "{") return parse_brace_display();
        if (t.text == "...") {
          advance();
          auto n = make(NodeKind::kConstant, t);
          n->const_kind = ConstKind::kEllipsis;
          n->value = "...";
          return finish(std::move(n));
        }
        fail_unexpected();
      default:
        fail_unexpected();
    }
    return nullptr;
  }

  NodePtr parse_strings() {
    const Token& start = peek();
    bool any_f = false;
    bool any_bytes = false;
    bool any_text = false;
    std::string decoded;
    while (at(TokenKind::kString)) {
      const Token& s = advance();
      const bool raw = s.prefix.find('r') != std::string::npos;
      if (s.prefix.find('f') != std::string::npos) any_f = true;
      if (s.prefix.find('b') != std::string::npos) {
        any_bytes = true;
      } else {
        any_text = true;
      }
      decoded += decode_string_body(s.body, raw);
    }
    if (any_bytes && any_text) fail("cannot mix bytes and nonbytes literals");
    if (any_f) {
      auto n = make(NodeKind::kJoinedStr, start);
      n->value = std::move(decoded);
      return finish(std::move(n));
    }
    auto n = make(NodeKind::kConstant, start);
    n->const_kind = any_bytes ? ConstKind::kBytes : ConstKind::kStr;
    n->value = std::move(decoded);
    return finish(std::move(n));
  }

  NodePtr parse_paren() {
    const Token& start = advance();
    if (at_op(")")) {
      advance();
      return finish(make(NodeKind::kTuple, start));
    }
    if (at_kw("yield")) {
      NodePtr y = parse_yield_expr();
      expect_op(")");
      return y;
    }
    NodePtr first = parse_namedexpr_or_star();
    if (at_kw("for") || at_kw("async")) {
      auto gen = make(NodeKind::kGeneratorExp, start);
      if (first->kind == NodeKind::kStarred) fail("iterable unpacking cannot be used in comprehension");
      gen->kids.push_back(std::move(first));
      parse_comp_for(gen->kids);
      expect_op(")");
      return finish(std::move(gen));
    }
    if (!at_op(",")) {
      if (first->kind == NodeKind::kStarred) fail("can't use starred expression here");
      expect_op(")");
      // Parenthesized expressions keep the inner node but widen its span.
      first->begin = start.begin;
      first->line = start.line;
      first->col = start.col;
      first->end = last_->end;
      first->end_line = last_->end_line;
      return first;
    }
    auto tuple = make(NodeKind::kTuple, start);
    tuple->kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_op(")")) break;
      tuple->kids.push_back(parse_namedexpr_or_star());
    }
    expect_op(")");
    return finish(std::move(tuple));
  }

  NodePtr parse_list_display() {
    const Token& start = advance();
    if (at_op("]")) {
      advance();
      return finish(make(NodeKind::kList, start));
    }
    NodePtr first = parse_namedexpr_or_star();
    if (at_kw("for") || at_kw("async")) {
      if (first->kind == NodeKind::kStarred) fail("iterable unpacking cannot be used in comprehension");
      auto comp = make(NodeKind::kListComp, start);
      comp->kids.push_back(std::move(first));
      parse_comp_for(comp->kids);
      expect_op("]");
      return finish(std::move(comp));
    }
    auto list = make(NodeKind::kList, start);
    list->kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_op("]")) break;
      list->kids.push_back(parse_namedexpr_or_star());
    }
    expect_op("]");
    return finish(std::move(list));
  }

  NodePtr parse_brace_display() {
    const Token& start = advance();
    if (at_op("}")) {
      advance();
      return finish(make(NodeKind::kDict, start));
    }
    if (at_op("**")) return parse_dict_rest(start, nullptr);
    NodePtr first = parse_namedexpr_or_star();
    if (at_op(":")) {
      if (first->kind == NodeKind::kStarred) fail_unexpected();
      return parse_dict_rest(start, std::move(first));
    }
    if (at_kw("for") || at_kw("async")) {
      if (first->kind == NodeKind::kStarred) fail("iterable unpacking cannot be used in comprehension");
      auto comp = make(NodeKind::kSetComp, start);
      comp->kids.push_back(std::move(first));
      parse_comp_for(comp->kids);
      expect_op("}");
      return finish(std::move(comp));
    }
    auto set = make(NodeKind::kSet, start);
    set->kids.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_op("}")) break;
      set->kids.push_back(parse_namedexpr_or_star());
    }
    expect_op("}");
    return finish(std::move(set));
  }

  NodePtr parse_dict_rest(const Token& start, NodePtr first_key) {
    auto dict = make(NodeKind::kDict, start);
    auto parse_entry = [&](NodePtr key) {
      if (key) {
        expect_op(":");
        dict->kids.push_back(std::move(key));
        dict->kids.push_back(parse_test());
      } else {
        expect_op("**");
        dict->kids.push_back(empty());
        dict->kids.push_back(parse_expr());
      }
    };
    parse_entry(std::move(first_key));
    if ((at_kw("for") || at_kw("async")) && dict->kids.size() == 2 && !dict->kids[0]->empty()) {
      auto comp = make(NodeKind::kDictComp, start);
      comp->kids.push_back(std::move(dict->kids[0]));
      comp->kids.push_back(std::move(dict->kids[1]));
      parse_comp_for(comp->kids);
      expect_op("}");
      return finish(std::move(comp));
    }
    while (at_op(",")) {
      advance();
      if (at_op("}")) break;
      if (at_op("**")) {
        parse_entry(nullptr);
      } else {
        parse_entry(parse_test());
      }
    }
    expect_op("}");
    return finish(std::move(dict));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Token* last_ = nullptr;
  bool tuple_is_bare_ = false;
};

}  // namespace

NodePtr parse_module(std::string_view source) { return Parser(source).parse_file(); }

}  // namespace relbench::py
