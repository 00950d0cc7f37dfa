#include <algorithm>
#include <map>
#include <set>

#include "extract.hpp"
#include "relbench/common/text.hpp"

namespace relbench::corpus {

namespace {

enum class Ctx { kBlock, kObject, kClass };

struct Frame {
  Ctx kind;
  std::string name;  // class name for kClass
  std::size_t close;
};

const std::set<std::string_view> kModifiers = {"static", "async", "get", "set"};

const std::set<std::string_view> kReserved = {
    "if", "for", "while", "switch", "catch", "function", "return", "typeof", "new", "delete", "void",
    "throw", "else", "do", "case", "in", "of", "instanceof", "yield", "await", "with", "super", "import",
};

class JsExtractor {
 public:
  explicit JsExtractor(const Scan& s) : s_(s) {}

  std::vector<RawFunction> run() {
    for (std::size_t i = 0; i < s_.size(); ++i) {
      while (!stack_.empty() && i > stack_.back().close) stack_.pop_back();
      if (s_.is_ident(i, "class") && !(i > 0 && s_.is(i - 1, "."))) {
        note_class(i);
      } else if (s_.is_ident(i, "function") && !(i > 0 && s_.is(i - 1, "."))) {
        function_keyword(i);
      } else if (s_.is(i, "=>") && s_.is(i + 1, "{")) {
        arrow(i);
      } else if (in_member_position(i)) {
        method(i);
      }
      if (s_.is(i, "{")) open_brace(i);
    }
    std::stable_sort(out_.begin(), out_.end(),
                     [](const RawFunction& a, const RawFunction& b) { return a.begin < b.begin; });
    return std::move(out_);
  }

 private:
  Ctx context() const { return stack_.empty() ? Ctx::kBlock : stack_.back().kind; }

  void open_brace(std::size_t i) {
    auto cls = class_bodies_.find(i);
    if (cls != class_bodies_.end()) {
      stack_.push_back({Ctx::kClass, cls->second, s_.match[i]});
      return;
    }
    Ctx kind = Ctx::kBlock;
    if (!function_bodies_.count(i) && i > 0) {
      const Tok& prev = s_.at(i - 1);
      if (prev.kind == TokKind::kPunct) {
        static const std::set<std::string_view> object_after = {"=", "(", ",", "[", "?", "!", "&", "|",
                                                                "+", "-", "...", "<", ">", "*", "%"};
        if (object_after.count(prev.text) || (prev.text == ":" && context() == Ctx::kObject)) kind = Ctx::kObject;
      } else if (prev.kind == TokKind::kIdent && (prev.text == "return" || prev.text == "yield")) {
        kind = Ctx::kObject;
      }
    }
    stack_.push_back({kind, {}, s_.match[i]});
  }

  void note_class(std::size_t i) {
    std::string name;
    std::size_t j = i + 1;
    if (s_.is_ident(j) && s_.at(j).text != "extends") {
      name = std::string(s_.at(j).text);
      ++j;
    } else {
      name = assignment_target(i).name;
    }
    while (j < s_.size() && !s_.is(j, "{")) {
      if (s_.is(j, "(") || s_.is(j, "[")) j = s_.match[j];
      ++j;
    }
    if (j < s_.size()) class_bodies_[j] = name.empty() ? "<anonymous>" : name;
  }

  struct Target {
    std::string name;
    std::size_t start = kNone;  // first token of the statement or property
  };

  // Name bound to a function expression starting at code token `expr`.
  Target assignment_target(std::size_t expr) const {
    Target t;
    if (expr == 0) return t;
    std::size_t p = expr - 1;
    if (s_.is(p, ":") && p > 0 && context() == Ctx::kObject) {
      const Tok& key = s_.at(p - 1);
      if (key.kind == TokKind::kIdent || key.kind == TokKind::kNumber) t.name = std::string(key.text);
      if (key.kind == TokKind::kString && key.text.size() >= 2) t.name = std::string(key.text.substr(1, key.text.size() - 2));
      if (!t.name.empty()) t.start = p - 1;
      return t;
    }
    if (!s_.is(p, "=") || p == 0) return t;
    const Tok& before = s_.at(p - 1);
    if (before.kind == TokKind::kPunct) return t;  // ==, !=, <= and friends
    // Member chain a.b.c ending at p - 1.
    std::size_t first = p - 1;
    while (first >= 2 && s_.is(first - 1, ".") && s_.is_ident(first - 2)) first -= 2;
    if (!s_.is_ident(first)) return t;
    std::vector<std::string> parts;
    for (std::size_t k = first; k < p; k += 2) {
      if (s_.at(k).text != "prototype") parts.emplace_back(s_.at(k).text);
    }
    t.name = join(parts, ".");
    t.start = first;
    if (first > 0 && (s_.is_ident(first - 1, "const") || s_.is_ident(first - 1, "let") || s_.is_ident(first - 1, "var"))) {
      t.start = first - 1;
    }
    if (context() == Ctx::kClass && parts.size() == 1) t.name = stack_.back().name + "." + t.name;
    t.start = with_export(t.start);
    return t;
  }

  std::size_t with_export(std::size_t start) const {
    if (start > 0 && s_.is_ident(start - 1, "default")) --start;
    if (start > 0 && s_.is_ident(start - 1, "export")) --start;
    return start;
  }

  void record(std::string name, std::size_t first, std::size_t body) {
    function_bodies_.insert(body);
    if (name.empty()) return;
    out_.push_back(make_function(s_, std::move(name), first, s_.match[body]));
  }

  void function_keyword(std::size_t i) {
    std::size_t j = i + 1;
    if (s_.is(j, "*")) ++j;
    std::string own;
    if (s_.is_ident(j)) own = std::string(s_.at(j++).text);
    if (!s_.is(j, "(")) return;
    std::size_t body = s_.match[j] + 1;
    if (!s_.is(body, "{")) return;
    std::size_t expr = i > 0 && s_.is_ident(i - 1, "async") ? i - 1 : i;
    Target target = assignment_target(expr);
    if (target.start != kNone) {
      record(own.empty() ? target.name : own, target.start, body);
    } else {
      record(own, with_export(expr), body);
    }
  }

  void arrow(std::size_t i) {
    std::size_t params = i - 1;
    if (s_.is(params, ")")) params = s_.match[params];
    if (params > 0 && s_.is_ident(params - 1, "async")) --params;
    Target target = assignment_target(params);
    record(target.start != kNone ? target.name : std::string(), target.start, i + 1);
  }

  bool in_member_position(std::size_t i) const {
    Ctx ctx = context();
    if (ctx != Ctx::kClass && ctx != Ctx::kObject) return false;
    if (i == 0) return false;
    std::size_t p = i - 1;
    if (!(s_.is(p, "{") || s_.is(p, ";") || s_.is(p, "}") || s_.is(p, ","))) return false;
    return s_.is_ident(i) || s_.is(i, "*") || s_.is(i, "#") || s_.at(i).kind == TokKind::kString ||
           s_.at(i).kind == TokKind::kNumber;
  }

  // [static|async|get|set|*]* name ( params ) { body }
  void method(std::size_t first) {
    std::size_t j = first;
    while (true) {
      if (s_.is(j, "*")) {
        ++j;
      } else if (s_.is_ident(j) && kModifiers.count(s_.at(j).text) && !s_.is(j + 1, "(")) {
        ++j;
      } else {
        break;
      }
    }
    std::string name;
    if (s_.is(j, "#") && s_.is_ident(j + 1)) {
      name = "#" + std::string(s_.at(j + 1).text);
      j += 2;
    } else if (s_.is_ident(j) || s_.at(j).kind == TokKind::kNumber) {
      name = std::string(s_.at(j).text);
      ++j;
    } else if (s_.at(j).kind == TokKind::kString && s_.at(j).text.size() >= 2) {
      name = std::string(s_.at(j).text.substr(1, s_.at(j).text.size() - 2));
      ++j;
    } else {
      return;
    }
    if (!s_.is(j, "(") || kReserved.count(name)) return;
    std::size_t body = s_.match[j] + 1;
    if (!s_.is(body, "{")) return;
    if (context() == Ctx::kClass) name = stack_.back().name + "." + name;
    record(name, first, body);
  }

  const Scan& s_;
  std::vector<Frame> stack_;
  std::map<std::size_t, std::string> class_bodies_;
  std::set<std::size_t> function_bodies_;
  std::vector<RawFunction> out_;
};

}  // namespace

std::vector<RawFunction> extract_javascript(std::string_view src) {
  Scan s = scan(src, Dialect::kJavaScript);
  return JsExtractor(s).run();
}

}  // namespace relbench::corpus
