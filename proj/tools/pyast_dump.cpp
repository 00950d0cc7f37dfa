// Dev helper: prints node-kind counts for a Python file, or SYNTAX_ERROR.
#include <iostream>
#include <map>

#include "relbench/common/text.hpp"
#include "relbench/pyfront/parser.hpp"

int main(int argc, char** argv) {
  using namespace relbench::py;
  for (int i = 1; i < argc; ++i) {
    std::string src = relbench::read_file(argv[i]);
    try {
      auto mod = parse_module(src);
      std::map<std::string, int> counts;
      walk(*mod, [&](const Node& n) {
        if (n.kind != NodeKind::kSeq && n.kind != NodeKind::kEmpty) counts[std::string(kind_name(n.kind))]++;
        return true;
      });
      std::cout << argv[i] << " OK";
      for (auto& [k, v] : counts) std::cout << ' ' << k << '=' << v;
      std::cout << '\n';
    } catch (const SyntaxError& e) {
      std::cout << argv[i] << " SYNTAX_ERROR " << e.what() << '\n';
    }
  }
}
