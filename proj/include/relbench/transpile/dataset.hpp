#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "relbench/transpile/transpile.hpp"

namespace relbench::transpile {

struct QaRecord {
  std::string id;  // numeric ids in the input are kept in their decimal form
  std::string query;
  std::string code;
  int label = 0;
};

struct TranspiledRecord {
  std::string id;
  std::string query;
  std::string c_code;
  int label = 0;
};

struct FailedRecord {
  std::string id;
  Failure failure;
};

struct HistogramRow {
  std::string key;
  std::size_t count = 0;
  double pct = 0.0;  // share of the histogram total, unrounded
};

struct FailureStats {
  std::size_t records = 0;
  std::size_t transpiled = 0;
  std::size_t failed = 0;
  std::vector<HistogramRow> by_category;   // share of failed records
  std::vector<HistogramRow> by_node_kind;  // share of failures that name a node kind
};

struct DatasetResult {
  std::vector<TranspiledRecord> transpiled;  // input order
  std::vector<FailedRecord> failures;        // input order
  FailureStats stats;
};

// Record-parallel (OpenMP); the output is identical to transpile_dataset_serial.
DatasetResult transpile_dataset(const std::vector<QaRecord>& records, const TypeMapping& types);
DatasetResult transpile_dataset_serial(const std::vector<QaRecord>& records, const TypeMapping& types);

FailureStats summarize(std::size_t records, const std::vector<FailedRecord>& failures);

// Two tables: failures by category, then by node kind.
std::string render_stats_table(const FailureStats& stats);

std::vector<QaRecord> read_qa_jsonl(const std::filesystem::path& path);

// Writes transpiled.jsonl, failures.jsonl, stats.json and stats.txt into `dir`.
void write_dataset_outputs(const std::filesystem::path& dir, const DatasetResult& result);

}  // namespace relbench::transpile
