#include "relbench/common/jsonl.hpp"

#include <fstream>

#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"

namespace relbench {

std::vector<Json> parse_jsonl(std::string_view text, std::string_view source_name) {
  std::vector<Json> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kParse,
                  std::string(source_name) + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
  }
  return rows;
}

std::vector<Json> read_jsonl(const std::string& path) {
  return parse_jsonl(read_file(path), path);
}

std::string to_jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump(-1, ' ', false, Json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void append_jsonl_line(const std::string& path, const Json& row) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for appending");
  out << row.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace relbench
