#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "relbench/common/jsonl.hpp"
#include "relbench/index/retriever.hpp"

struct sqlite3;

namespace relbench::annotate {

enum class LabelSource { kHuman, kLlm };

std::string_view source_name(LabelSource s);  // "human" / "llm"
LabelSource parse_source(std::string_view name);

struct QueryRecord {
  std::string query_id;
  std::string text;
  std::string repo;
  std::string retriever;  // RetrieverConfig fingerprint

  bool operator==(const QueryRecord&) const = default;
};

// Whitespace is trimmed and inner runs collapse to one space before hashing.
std::string normalize_query(std::string_view text);
std::string make_query_id(std::string_view text, std::string_view repo, std::string_view retriever);

struct LabelRecord {
  std::string annotator_id;
  std::string query_id;
  std::string entity_id;
  int label = 0;
  std::int64_t timestamp_ms = 0;
  LabelSource source = LabelSource::kHuman;

  bool operator==(const LabelRecord&) const = default;

  Json to_json() const;
  // Throws Error(kParse) for missing keys or a label outside {0, 1}.
  static LabelRecord from_json(const Json& j);
};

using LabelKey = std::tuple<std::string, std::string, std::string>;  // annotator, query, entity

// Latest label per (annotator, query, entity). Equal timestamps are broken by
// the larger label so the result does not depend on log order.
std::map<LabelKey, LabelRecord> effective_view(const std::vector<LabelRecord>& log);

void write_label_file(const std::vector<LabelRecord>& labels, const std::filesystem::path& path);
std::vector<LabelRecord> read_label_file(const std::filesystem::path& path);

struct MergeReport {
  std::size_t read = 0;
  std::size_t inserted = 0;
  std::size_t duplicates = 0;
};

// Queries, frozen result lists and an append-only label log in one SQLite
// file. Methods are serialized on an internal mutex.
class AnnotationStore {
 public:
  explicit AnnotationStore(const std::filesystem::path& db_file);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Milliseconds since the epoch; replaceable for tests.
  void set_clock(std::function<std::int64_t()> clock);

  // Idempotent: the same (text, repo, retriever) returns the existing record.
  QueryRecord register_query(std::string_view text, const std::string& repo, const std::string& retriever);
  std::optional<QueryRecord> find_query(const std::string& query_id) const;
  std::vector<QueryRecord> queries(const std::string& repo = "", const std::string& retriever = "") const;

  // Freezes the ranked list for a query. Re-snapshotting identical content is
  // a no-op; different content throws Error(kConflict).
  void snapshot_results(const QueryRecord& query, const std::vector<index::RankedResult>& results);
  // Throws Error(kReferential) when the query has no snapshot.
  std::vector<index::RankedResult> snapshot(const std::string& query_id) const;
  bool has_snapshot(const std::string& query_id) const;

  // Appends a label with a timestamp strictly after every stored one.
  // Throws Error(kReferential) unless the entity is in the query's snapshot,
  // Error(kCollision) if the annotator is already known with the other source.
  LabelRecord record_label(const std::string& annotator_id, const std::string& query_id,
                           const std::string& entity_id, int label, LabelSource source);

  std::vector<LabelRecord> log() const;
  std::vector<LabelRecord> effective_labels() const;
  std::vector<LabelRecord> export_annotator(const std::string& annotator_id) const;
  std::map<std::string, LabelSource> annotators() const;

  // Adds records not already present. Throws Error(kCollision) naming every
  // annotator whose source differs from the local one (or within the file);
  // nothing is written in that case.
  MergeReport merge(const std::vector<LabelRecord>& imported);

 private:
  void exec(const char* sql) const;
  std::map<std::string, LabelSource> annotators_locked() const;
  std::vector<LabelRecord> query_labels(const char* sql, const std::string& bind) const;

  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
  std::function<std::int64_t()> clock_;
};

}  // namespace relbench::annotate
