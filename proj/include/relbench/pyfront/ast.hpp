#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace relbench::py {

// Node kinds follow the names of Python's own `ast` module so failure
// reports can cite them directly. Seq and Empty are structural helpers.
enum class NodeKind {
  kModule,
  // statements
  kFunctionDef, kAsyncFunctionDef, kClassDef, kReturn, kDelete, kAssign, kAugAssign,
  kAnnAssign, kFor, kAsyncFor, kWhile, kIf, kWith, kAsyncWith, kRaise, kTry, kAssert,
  kImport, kImportFrom, kGlobal, kNonlocal, kExpr, kPass, kBreak, kContinue,
  // expressions
  kBoolOp, kNamedExpr, kBinOp, kUnaryOp, kLambda, kIfExp, kDict, kSet, kListComp,
  kSetComp, kDictComp, kGeneratorExp, kAwait, kYield, kYieldFrom, kCompare, kCall,
  kJoinedStr, kConstant, kAttribute, kSubscript, kStarred, kName, kList, kTuple, kSlice,
  // helpers
  kArguments, kArg, kKeyword, kComprehension, kExceptHandler, kWithItem, kAlias,
  kSeq, kEmpty,
};

std::string_view kind_name(NodeKind kind);

enum class ConstKind { kNone, kTrue, kFalse, kInt, kFloat, kComplex, kStr, kBytes, kEllipsis };

struct Node;
using NodePtr = std::unique_ptr<Node>;

// Child layout per kind, always in source order:
//   Module            stmts...
//   FunctionDef       [Seq decorators, Arguments, returns|Empty, Seq body]
//   ClassDef          [Seq decorators, Seq bases/keywords, Seq body]
//   Return            [value|Empty]
//   Delete            targets...
//   Assign            targets..., value
//   AugAssign (op)    [target, value]
//   AnnAssign         [target, annotation, value|Empty]
//   For               [target, iter, Seq body, Seq orelse]
//   While / If        [test, Seq body, Seq orelse]   (elif is an If inside orelse)
//   With              WithItem..., Seq body;  WithItem [expr, vars|Empty]
//   Raise             [exc|Empty, cause|Empty]
//   Try               [Seq body, Seq handlers, Seq orelse, Seq finalbody]
//   ExceptHandler     [type|Empty, Seq body]   (name = bound name)
//   Assert            [test, msg|Empty]
//   Import/ImportFrom Alias...                 (ImportFrom name = module)
//   Global/Nonlocal   names in `names`
//   Expr              [value]
//   BoolOp (op)       values...
//   BinOp (op)        [left, right]
//   UnaryOp (op)      [operand]
//   Compare           [left, comparators...]   (operators in `names`)
//   Lambda            [Arguments, body]
//   IfExp             [body, test, orelse]
//   Dict              key|Empty, value, ...   (Empty key is `**mapping`)
//   ListComp etc.     [elt, Comprehension...];  DictComp [key, value, Comprehension...]
//   Comprehension     [target, iter, ifs...]
//   Call              [func, args/keywords...]; Keyword name empty for `**kw`
//   Attribute         [value]                  (name = attr)
//   Subscript         [value, slice]
//   Slice             [lower|Empty, upper|Empty, step|Empty]
//   Arguments         Arg...;  Arg [annotation|Empty, default|Empty], op = posonly|pos|vararg|kwonly|kwarg
struct Node {
  NodeKind kind = NodeKind::kEmpty;
  int line = 0;
  int col = 0;
  int end_line = 0;
  std::size_t begin = 0;  // byte offsets of the first and one-past-last token
  std::size_t end = 0;

  std::string name;                // identifier payload
  std::string op;                  // operator payload (ast operator class name)
  std::vector<std::string> names;  // Compare operators, Global/Nonlocal names
  ConstKind const_kind = ConstKind::kNone;
  std::string value;               // Constant: decoded string, or literal text
  std::vector<NodePtr> kids;

  Node* kid(std::size_t i) const { return kids.at(i).get(); }
  bool empty() const { return kind == NodeKind::kEmpty; }
};

}  // namespace relbench::py
