#include "relbench/transpile/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>

#include "relbench/common/error.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/text.hpp"

namespace relbench::transpile {

namespace {

std::vector<TranspileResult> run_parallel(const std::vector<QaRecord>& records, const TypeMapping& types) {
  std::vector<TranspileResult> results(records.size());
  const long n = static_cast<long>(records.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    results[i] = transpile_function(records[i].code, types);
  }
  return results;
}

std::vector<TranspileResult> run_serial(const std::vector<QaRecord>& records, const TypeMapping& types) {
  std::vector<TranspileResult> results;
  results.reserve(records.size());
  for (const auto& r : records) results.push_back(transpile_function(r.code, types));
  return results;
}

DatasetResult assemble(const std::vector<QaRecord>& records, std::vector<TranspileResult> results) {
  DatasetResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const QaRecord& rec = records[i];
    if (results[i].ok()) {
      out.transpiled.push_back({rec.id, rec.query, std::move(results[i].c_source), rec.label});
    } else {
      out.failures.push_back({rec.id, std::move(*results[i].failure)});
    }
  }
  out.stats = summarize(records.size(), out.failures);
  return out;
}

std::vector<HistogramRow> histogram(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [k, c] : counts) total += c;
  std::vector<HistogramRow> rows;
  for (const auto& [k, c] : counts) {
    rows.push_back({k, c, total ? 100.0 * static_cast<double>(c) / static_cast<double>(total) : 0.0});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return rows;
}

void render_table(std::string& out, const std::string& title, const std::string& key_header,
                  const std::vector<HistogramRow>& rows) {
  std::size_t width = key_header.size();
  std::size_t total = 0;
  for (const auto& r : rows) {
    width = std::max(width, r.key.size());
    total += r.count;
  }
  width = std::max<std::size_t>(width, 5);
  char buf[256];
  out += title + "\n";
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s\n", static_cast<int>(width), key_header.c_str(), "Count", "%");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %8zu %8s\n", static_cast<int>(width), r.key.c_str(), r.count,
                  format_fixed(r.pct, 1).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s %8zu %8s\n", static_cast<int>(width), "Total", total,
                total ? "100.0" : "0.0");
  out += buf;
}

Json histogram_json(const std::vector<HistogramRow>& rows, const char* key_name) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{key_name, r.key}, {"count", r.count}, {"pct", r.pct}});
  }
  return arr;
}

std::string record_id(const Json& value, std::size_t line) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw Error(ErrorCode::kParse, "record " + std::to_string(line) + ": id must be a string or integer");
}

}  // namespace

DatasetResult transpile_dataset(const std::vector<QaRecord>& records, const TypeMapping& types) {
  return assemble(records, run_parallel(records, types));
}

DatasetResult transpile_dataset_serial(const std::vector<QaRecord>& records, const TypeMapping& types) {
  return assemble(records, run_serial(records, types));
}

FailureStats summarize(std::size_t records, const std::vector<FailedRecord>& failures) {
  FailureStats stats;
  stats.records = records;
  stats.failed = failures.size();
  stats.transpiled = records - failures.size();
  std::map<std::string, std::size_t> categories;
  std::map<std::string, std::size_t> kinds;
  for (const auto& f : failures) {
    ++categories[std::string(category_name(f.failure.category))];
    if (!f.failure.node_kind.empty()) ++kinds[f.failure.node_kind];
  }
  stats.by_category = histogram(categories);
  stats.by_node_kind = histogram(kinds);
  return stats;
}

std::string render_stats_table(const FailureStats& stats) {
  std::string out;
  char buf[160];
  double pct = stats.records ? 100.0 * static_cast<double>(stats.transpiled) / static_cast<double>(stats.records) : 0.0;
  std::snprintf(buf, sizeof buf, "Transpiled %zu of %zu records (%s%%)\n\n", stats.transpiled, stats.records,
                format_fixed(pct, 2).c_str());
  out += buf;
  render_table(out, "Transpilation exception categories", "Category", stats.by_category);
  out += "\n";
  render_table(out, "Unsupported node kinds", "Node", stats.by_node_kind);
  return out;
}

std::vector<QaRecord> read_qa_jsonl(const std::filesystem::path& path) {
  std::vector<QaRecord> records;
  auto rows = read_jsonl(path.string());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json& row = rows[i];
    try {
      QaRecord rec;
      rec.id = record_id(row.at("id"), i + 1);
      rec.query = row.at("query").get<std::string>();
      rec.code = row.at("code").get<std::string>();
      rec.label = row.at("label").get<int>();
      records.push_back(std::move(rec));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ": record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

void write_dataset_outputs(const std::filesystem::path& dir, const DatasetResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<Json> ok;
  for (const auto& r : result.transpiled) {
    ok.push_back(Json{{"id", r.id}, {"query", r.query}, {"c_code", r.c_code}, {"label", r.label}});
  }
  std::vector<Json> failed;
  for (const auto& f : result.failures) {
    failed.push_back(Json{{"id", f.id},
                          {"category", category_name(f.failure.category)},
                          {"node_kind", f.failure.node_kind},
                          {"detail", f.failure.detail}});
  }
  const FailureStats& s = result.stats;
  Json stats{{"records", s.records},
             {"transpiled", s.transpiled},
             {"failed", s.failed},
             {"pct_transpiled",
              s.records ? 100.0 * static_cast<double>(s.transpiled) / static_cast<double>(s.records) : 0.0},
             {"by_category", histogram_json(s.by_category, "category")},
             {"by_node_kind", histogram_json(s.by_node_kind, "node_kind")}};

  write_file_atomic((dir / "transpiled.jsonl").string(), to_jsonl(ok));
  write_file_atomic((dir / "failures.jsonl").string(), to_jsonl(failed));
  write_file_atomic((dir / "stats.json").string(), stats.dump(2) + "\n");
  write_file_atomic((dir / "stats.txt").string(), render_stats_table(s));
}

}  // namespace relbench::transpile
