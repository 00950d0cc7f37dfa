#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "relbench/pyfront/ast.hpp"

namespace relbench::transpile {

// Failure taxonomy for Python-to-C transpilation.
enum class Category {
  kSourceCode,         // construct outside the supported subset; node_kind names it
  kGeneric,            // unclassifiable or emitter-internal failure
  kNoneNotAllowed,     // a None value the emitter cannot place
  kInvalidAnnotation,  // annotation that does not map to a C type
  kAttributeError,     // attribute access
  kSyntaxError,        // the source does not parse
};

std::string_view category_name(Category category);
std::optional<Category> parse_category(std::string_view name);

struct Failure {
  Category category = Category::kGeneric;
  std::string node_kind;  // e.g. "ListComp"; empty when not tied to one node
  std::string detail;
  int line = 0;
};

// Maps Python annotations to C types. Unannotated positions get
// `default_type`, which is the literal placeholder "None" unless overridden.
struct TypeMapping {
  std::string default_type = "None";

  // int->long, float->double, bool->int, str->char*; nullopt otherwise.
  static std::optional<std::string> map_annotation(std::string_view python_name);
};

struct ParseOutcome {
  py::NodePtr tree;
  std::optional<Failure> failure;  // set (category SyntaxError) when parsing failed
};

ParseOutcome parse_python(std::string_view source);

// First construct, in source order, that the emitter cannot translate.
std::optional<Failure> classify_unsupported(const py::Node& module);

// Raised by emit_c on internal inconsistencies; maps to Category::kGeneric.
class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Emits a single C function. Requires classify_unsupported(module) to be empty.
std::string emit_c(const py::Node& module, const TypeMapping& types);

struct TranspileResult {
  enum class Status { kOk, kFailed };
  Status status = Status::kFailed;
  std::string c_source;            // kOk only
  std::optional<Failure> failure;  // kFailed only

  bool ok() const { return status == Status::kOk; }
};

// parse -> classify -> emit.
TranspileResult transpile_function(std::string_view source, const TypeMapping& types);

}  // namespace relbench::transpile
