#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "relbench/common/error.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/text.hpp"
#include "relbench/pyfront/parser.hpp"
#include "relbench/transpile/dataset.hpp"
#include "relbench/transpile/transpile.hpp"

namespace fs = std::filesystem;
using namespace relbench;
using namespace relbench::transpile;

namespace {

const fs::path kFixtures = fs::path(RELBENCH_FIXTURE_DIR) / "transpile";

std::vector<fs::path> files_with_ext(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool have_c_compiler() {
  static const bool ok = std::system("cc --version > /dev/null 2>&1") == 0;
  return ok;
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("relbench_transpile_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool c_syntax_ok(const std::string& source, const fs::path& dir) {
  fs::path file = dir / "unit.c";
  write_file_atomic(file.string(), source);
  std::string cmd = "cc -fsyntax-only -w -x c " + file.string() + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

Category expect_category(const TranspileResult& r) {
  EXPECT_FALSE(r.ok());
  return r.failure ? r.failure->category : Category::kGeneric;
}

std::string collapse_ws(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
    } else {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

TEST(Transpile, AddWithPlaceholderTypes) {
  auto r = transpile_function("def add(a, b): return a + b", TypeMapping{});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(collapse_ws(r.c_source), "None add(None a, None b) { return a + b; }");
}

TEST(Transpile, BoolLiteralMapsToInt) {
  auto r = transpile_function("def t(): return True", TypeMapping{});
  ASSERT_TRUE(r.ok());
  EXPECT_NE(r.c_source.find("return 1;"), std::string::npos);
}

TEST(Transpile, RangeLoopUsesLongCounter) {
  auto r = transpile_function("def f(n):\n  s = 0\n  for i in range(n):\n    s += i\n  return s", TypeMapping{});
  ASSERT_TRUE(r.ok());
  EXPECT_NE(r.c_source.find("long i;"), std::string::npos);
  EXPECT_NE(r.c_source.find("for (i = 0; i < n; i++)"), std::string::npos);
}

TEST(Transpile, DefaultTypeOverride) {
  TypeMapping types;
  types.default_type = "long";
  auto r = transpile_function("def add(a, b): return a + b", types);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(collapse_ws(r.c_source), "long add(long a, long b) { return a + b; }");
}

TEST(Transpile, SpecExamplesClassify) {
  auto lc = transpile_function("def f(xs): return [x for x in xs]", TypeMapping{});
  EXPECT_EQ(expect_category(lc), Category::kSourceCode);
  EXPECT_EQ(lc.failure->node_kind, "ListComp");
  auto ad = transpile_function("async def f(): pass", TypeMapping{});
  EXPECT_EQ(ad.failure->node_kind, "AsyncFunctionDef");
  EXPECT_EQ(expect_category(transpile_function("def f(: return", TypeMapping{})), Category::kSyntaxError);
  auto tree = parse_python("def f(): return 1");
  ASSERT_TRUE(tree.tree);
  EXPECT_FALSE(classify_unsupported(*tree.tree).has_value());
}

TEST(Transpile, FirstFailureInSourceOrder) {
  auto r = transpile_function("def f(x):\n  y = x.a\n  return [y]\n", TypeMapping{});
  EXPECT_EQ(expect_category(r), Category::kAttributeError);
  r = transpile_function("def f(x):\n  y = [x]\n  return x.a\n", TypeMapping{});
  EXPECT_EQ(r.failure->node_kind, "List");
  EXPECT_EQ(r.failure->line, 2);
}

TEST(Transpile, CategoryNamesRoundTrip) {
  for (auto c : {Category::kSourceCode, Category::kGeneric, Category::kNoneNotAllowed, Category::kInvalidAnnotation,
                 Category::kAttributeError, Category::kSyntaxError}) {
    EXPECT_EQ(parse_category(category_name(c)), c);
  }
  EXPECT_FALSE(parse_category("Bogus").has_value());
}

TEST(TranspileGolden, SupportedFixturesMatchExactly) {
  auto inputs = files_with_ext(kFixtures / "supported", ".py");
  ASSERT_GE(inputs.size(), 20u);
  for (const auto& py : inputs) {
    auto r = transpile_function(read_file(py.string()), TypeMapping{});
    ASSERT_TRUE(r.ok()) << py << ": " << r.failure->detail;
    fs::path golden = py;
    golden.replace_extension(".c");
    EXPECT_EQ(r.c_source, read_file(golden.string())) << py;
  }
}

TEST(TranspileGolden, SupportedFixturesCompileWithConcreteType) {
  if (!have_c_compiler()) GTEST_SKIP() << "no C compiler on PATH";
  fs::path dir = scratch_dir("golden");
  TypeMapping types;
  types.default_type = "long";
  for (const auto& py : files_with_ext(kFixtures / "supported", ".py")) {
    auto r = transpile_function(read_file(py.string()), types);
    ASSERT_TRUE(r.ok()) << py;
    EXPECT_TRUE(c_syntax_ok(r.c_source, dir)) << py << "\n" << r.c_source;
  }
  fs::remove_all(dir);
}

TEST(TranspileGolden, UnsupportedFixturesClassify) {
  auto inputs = files_with_ext(kFixtures / "unsupported", ".py");
  ASSERT_GE(inputs.size(), 15u);
  for (const auto& py : inputs) {
    fs::path exp = py;
    exp.replace_extension(".expected");
    std::istringstream in(read_file(exp.string()));
    std::string category, node_kind;
    in >> category >> node_kind;
    if (node_kind == "-") node_kind.clear();
    auto r = transpile_function(read_file(py.string()), TypeMapping{});
    ASSERT_FALSE(r.ok()) << py;
    EXPECT_EQ(category_name(r.failure->category), category) << py;
    EXPECT_EQ(r.failure->node_kind, node_kind) << py;
    EXPECT_FALSE(r.failure->detail.empty());
  }
}

TEST(Transpile, DeterministicOutput) {
  for (const auto& py : files_with_ext(kFixtures / "supported", ".py")) {
    std::string src = read_file(py.string());
    EXPECT_EQ(transpile_function(src, TypeMapping{}).c_source, transpile_function(src, TypeMapping{}).c_source);
  }
}

// Independent evaluator over the parsed tree with Python semantics, used to
// check that emitted C preserves the meaning of the expression.
namespace {

long eval(const py::Node& e, const std::map<std::string, long>& env);

bool truthy(const py::Node& e, const std::map<std::string, long>& env) { return eval(e, env) != 0; }

long eval(const py::Node& e, const std::map<std::string, long>& env) {
  using py::NodeKind;
  switch (e.kind) {
    case NodeKind::kName:
      return env.at(e.name);
    case NodeKind::kConstant:
      if (e.const_kind == py::ConstKind::kTrue) return 1;
      if (e.const_kind == py::ConstKind::kFalse) return 0;
      return std::stol(e.value);
    case NodeKind::kBinOp: {
      long a = eval(*e.kid(0), env), b = eval(*e.kid(1), env);
      if (e.op == "Add") return a + b;
      if (e.op == "Sub") return a - b;
      if (e.op == "Mult") return a * b;
      break;
    }
    case NodeKind::kUnaryOp:
      if (e.op == "USub") return -eval(*e.kid(0), env);
      if (e.op == "UAdd") return eval(*e.kid(0), env);
      if (e.op == "Not") return !truthy(*e.kid(0), env);
      break;
    case NodeKind::kBoolOp:
      for (const auto& v : e.kids) {
        bool t = truthy(*v, env);
        if (e.op == "And" && !t) return 0;
        if (e.op == "Or" && t) return 1;
      }
      return e.op == "And" ? 1 : 0;
    case NodeKind::kCompare: {
      long left = eval(*e.kid(0), env);
      for (std::size_t i = 0; i < e.names.size(); ++i) {
        long right = eval(*e.kid(i + 1), env);
        const auto& op = e.names[i];
        bool ok = op == "Lt" ? left < right : op == "LtE" ? left <= right : op == "Gt" ? left > right
                : op == "GtE" ? left >= right : op == "Eq" ? left == right : left != right;
        if (!ok) return 0;
        left = right;
      }
      return 1;
    }
    default:
      break;
  }
  throw std::runtime_error("evaluator: unsupported node");
}

class ExprGen {
 public:
  explicit ExprGen(unsigned seed) : rng_(seed) {}

  std::string arith(int depth) {
    int pick = depth <= 0 ? pick_n(2) : pick_n(6);
    switch (pick) {
      case 0: return pick_n(2) ? "a" : "b";
      case 1: return std::to_string(pick_n(9));
      case 2: return "-" + atom(depth - 1);
      case 3: return arith(depth - 1) + " + " + arith(depth - 1);
      case 4: return arith(depth - 1) + " - " + atom(depth - 1);
      default: return atom(depth - 1) + " * " + atom(depth - 1);
    }
  }

  std::string cond(int depth) {
    static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
    int pick = depth <= 0 ? 0 : pick_n(5);
    switch (pick) {
      case 0: return arith(1) + " " + ops[pick_n(6)] + " " + arith(1);
      case 1: return arith(1) + " " + ops[pick_n(4)] + " " + arith(1) + " " + ops[pick_n(4)] + " " + arith(1);
      case 2: return "not " + paren(cond(depth - 1));
      case 3: return cond(depth - 1) + " and " + cond(depth - 1);
      default: return cond(depth - 1) + " or " + cond(depth - 1);
    }
  }

 private:
  int pick_n(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  static std::string paren(const std::string& s) { return "(" + s + ")"; }
  std::string atom(int depth) {
    std::string s = arith(depth);
    return s.find(' ') == std::string::npos && s[0] != '-' ? s : paren(s);
  }
  std::mt19937 rng_;
};

}  // namespace

TEST(TranspileProperty, EmittedExpressionsPreserveMeaning) {
  if (!have_c_compiler()) GTEST_SKIP() << "no C compiler on PATH";
  ExprGen gen(20240611);
  const int kCases = 150;
  const std::pair<long, long> inputs[] = {{0, 0}, {1, -2}, {3, 3}, {-4, 7}};
  std::string program = "#include <stdio.h>\n";
  std::vector<long> expected;
  for (int i = 0; i < kCases; ++i) {
    std::string name = "case_" + std::to_string(i);
    std::string src = "def " + name + "(a: int, b: int) -> int:\n    if " + gen.cond(3) + ":\n        return " +
                      gen.arith(3) + "\n    return " + gen.arith(3) + "\n";
    auto r = transpile_function(src, TypeMapping{});
    ASSERT_TRUE(r.ok()) << src;
    program += r.c_source;
    auto tree = py::parse_module(src);
    const py::Node& body = *tree->kid(0)->kid(3);
    for (auto [a, b] : inputs) {
      std::map<std::string, long> env{{"a", a}, {"b", b}};
      const py::Node& branch = *body.kid(0);
      expected.push_back(truthy(*branch.kid(0), env) ? eval(*branch.kid(1)->kid(0)->kid(0), env)
                                                      : eval(*body.kid(1)->kid(0), env));
    }
  }
  program += "int main(void) {\n";
  for (int i = 0; i < kCases; ++i) {
    for (auto [a, b] : inputs) {
      program += "  printf(\"%ld\\n\", case_" + std::to_string(i) + "(" + std::to_string(a) + "L, " +
                 std::to_string(b) + "L));\n";
    }
  }
  program += "  return 0;\n}\n";

  fs::path dir = scratch_dir("semantics");
  write_file_atomic((dir / "prog.c").string(), program);
  std::string cmd = "cc -w -o " + (dir / "prog").string() + " " + (dir / "prog.c").string() + " && " +
                    (dir / "prog").string() + " > " + (dir / "out.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::istringstream out(read_file((dir / "out.txt").string()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    long got = 0;
    ASSERT_TRUE(out >> got);
    EXPECT_EQ(got, expected[i]) << "case " << i / 4;
  }
  fs::remove_all(dir);
}

TEST(TranspileProperty, TotalityOnMixedInputs) {
  std::vector<std::string> sources;
  for (const auto& dir : {"supported", "unsupported"}) {
    for (const auto& py : files_with_ext(kFixtures / dir, ".py")) sources.push_back(read_file(py.string()));
  }
  sources.push_back("");
  sources.push_back("\xff\xfe garbage");
  sources.push_back("x = 1\n");
  for (const auto& s : sources) {
    auto r = transpile_function(s, TypeMapping{});
    EXPECT_NE(r.ok(), r.failure.has_value());
    EXPECT_EQ(r.ok(), !r.c_source.empty());
  }
}

namespace {

std::vector<QaRecord> four_records() {
  return {
      {"1", "sum list", "def f(n):\n  s = 0\n  for i in range(n):\n    s += i\n  return s\n", 1},
      {"2", "squares", "def f(xs): return [x * x for x in xs]\n", 0},
      {"3", "add", "def add(a, b): return a + b\n", 1},
      {"4", "is positive", "def pos(x): return x > 0\n", 0},
  };
}

}  // namespace

TEST(TranspileDataset, FourRecordExample) {
  auto result = transpile_dataset(four_records(), TypeMapping{});
  ASSERT_EQ(result.transpiled.size(), 3u);
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].id, "2");
  EXPECT_EQ(result.stats.records, 4u);
  EXPECT_EQ(result.stats.transpiled, 3u);
  ASSERT_EQ(result.stats.by_category.size(), 1u);
  EXPECT_EQ(result.stats.by_category[0].key, "SourceCode");
  EXPECT_EQ(result.stats.by_category[0].count, 1u);
  ASSERT_EQ(result.stats.by_node_kind.size(), 1u);
  EXPECT_EQ(result.stats.by_node_kind[0].key, "ListComp");
  EXPECT_DOUBLE_EQ(result.stats.by_node_kind[0].pct, 100.0);
  EXPECT_EQ(result.transpiled[0].id, "1");
  EXPECT_EQ(result.transpiled[2].label, 0);
}

TEST(TranspileDataset, EmptyDataset) {
  auto result = transpile_dataset({}, TypeMapping{});
  EXPECT_TRUE(result.transpiled.empty());
  EXPECT_TRUE(result.failures.empty());
  EXPECT_EQ(result.stats.records, 0u);
  EXPECT_TRUE(result.stats.by_category.empty());
}

TEST(TranspileDataset, ParallelMatchesSerialAndHistogramsSumTo100) {
  std::vector<QaRecord> records;
  int n = 0;
  for (int rep = 0; rep < 5; ++rep) {
    for (const auto& dir : {"supported", "unsupported"}) {
      for (const auto& py : files_with_ext(kFixtures / dir, ".py")) {
        records.push_back({std::to_string(n), "q" + std::to_string(n), read_file(py.string()), n % 2});
        ++n;
      }
    }
  }
  auto par = transpile_dataset(records, TypeMapping{});
  auto ser = transpile_dataset_serial(records, TypeMapping{});
  ASSERT_EQ(par.transpiled.size(), ser.transpiled.size());
  for (std::size_t i = 0; i < par.transpiled.size(); ++i) {
    EXPECT_EQ(par.transpiled[i].id, ser.transpiled[i].id);
    EXPECT_EQ(par.transpiled[i].c_code, ser.transpiled[i].c_code);
  }
  ASSERT_EQ(par.failures.size(), ser.failures.size());
  EXPECT_EQ(par.transpiled.size() + par.failures.size(), records.size());
  double cat_sum = 0, kind_sum = 0;
  for (const auto& r : par.stats.by_category) cat_sum += r.pct;
  for (const auto& r : par.stats.by_node_kind) kind_sum += r.pct;
  EXPECT_NEAR(cat_sum, 100.0, 0.1);
  EXPECT_NEAR(kind_sum, 100.0, 0.1);
  for (std::size_t i = 1; i < par.stats.by_category.size(); ++i) {
    EXPECT_GE(par.stats.by_category[i - 1].count, par.stats.by_category[i].count);
  }
}

TEST(TranspileDataset, WritesOutputsAndReadsInput) {
  fs::path dir = scratch_dir("io");
  write_file_atomic((dir / "in.jsonl").string(),
                    "{\"id\": 7, \"query\": \"add\", \"code\": \"def add(a, b): return a + b\", \"label\": 1}\n"
                    "{\"id\": \"x8\", \"query\": \"lc\", \"code\": \"def f(xs): return [x for x in xs]\", "
                    "\"label\": 0}\n");
  auto records = read_qa_jsonl(dir / "in.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].id, "7");
  auto result = transpile_dataset(records, TypeMapping{});
  write_dataset_outputs(dir / "out", result);
  auto ok = read_jsonl((dir / "out" / "transpiled.jsonl").string());
  ASSERT_EQ(ok.size(), 1u);
  EXPECT_EQ(ok[0]["id"], "7");
  EXPECT_EQ(ok[0]["label"], 1);
  auto failed = read_jsonl((dir / "out" / "failures.jsonl").string());
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_EQ(failed[0]["category"], "SourceCode");
  EXPECT_EQ(failed[0]["node_kind"], "ListComp");
  auto stats = Json::parse(read_file((dir / "out" / "stats.json").string()));
  EXPECT_EQ(stats["records"], 2);
  EXPECT_EQ(stats["by_node_kind"][0]["node_kind"], "ListComp");
  std::string table = read_file((dir / "out" / "stats.txt").string());
  EXPECT_NE(table.find("SourceCode"), std::string::npos);
  EXPECT_NE(table.find("Total"), std::string::npos);
  fs::remove_all(dir);
}

TEST(TranspileDataset, MalformedInputIsParseError) {
  fs::path dir = scratch_dir("bad");
  write_file_atomic((dir / "in.jsonl").string(), "{\"id\": 1, \"query\": \"q\"}\n");
  EXPECT_THROW(read_qa_jsonl(dir / "in.jsonl"), Error);
  fs::remove_all(dir);
}
