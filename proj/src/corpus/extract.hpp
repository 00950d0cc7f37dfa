#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scanner.hpp"

namespace relbench::corpus {

// A function located in one source file, before it becomes a CodeEntity.
struct RawFunction {
  std::string name;
  std::size_t begin = 0;  // byte range of the declaration text
  std::size_t end = 0;
  int start_line = 0;
  int end_line = 0;
  std::string doc;
};

// Each extractor throws (ScanError or py::SyntaxError) when the file cannot
// be parsed. Results are in source order of the declaration start.
std::vector<RawFunction> extract_c(std::string_view src);
std::vector<RawFunction> extract_go(std::string_view src);
std::vector<RawFunction> extract_java(std::string_view src);
std::vector<RawFunction> extract_javascript(std::string_view src);
std::vector<RawFunction> extract_python(std::string_view src);

// Declaration spanning code tokens [first, last] of `s`.
RawFunction make_function(const Scan& s, std::string name, std::size_t first, std::size_t last);

}  // namespace relbench::corpus
