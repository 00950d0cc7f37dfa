#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relbench/annotate/store.hpp"
#include "relbench/corpus/corpus.hpp"
#include "relbench/index/store.hpp"
#include "relbench/judge/judge.hpp"
#include "relbench/metrics/report.hpp"

namespace relbench::service {

// Everything lives under one data directory:
//   relbench.json            optional configuration (see AppConfig)
//   queries.txt              predefined query list
//   corpus/<repo>.jsonl      extracted functions
//   index/<repo>/<name>/     retriever indexes
//   annotations.db           queries, snapshots and labels
//   embeddings.jsonl         embedding cache
//   judge/<model>/verdicts.jsonl
struct AppConfig {
  std::filesystem::path data_dir;
  std::vector<corpus::RepoSpec> repos;
  std::vector<index::RetrieverConfig> retrievers;  // defaults to bm25 alone
  std::vector<judge::JudgeConfig> judges;
  std::filesystem::path queries_file;  // defaults to <data_dir>/queries.txt
  std::string listen_addr = "localhost:8080";

  // Reads <data_dir>/relbench.json when present; otherwise defaults.
  static AppConfig load(const std::filesystem::path& data_dir);
  // Throws Error(kConfig) for duplicate retriever names and Error(kPath) for
  // configured paths that do not exist.
  void validate() const;
};

struct IngestSummary {
  std::string repo;
  std::size_t files = 0;
  std::size_t functions = 0;
  corpus::CorpusStats stats;
  std::vector<corpus::Warning> warnings;
};

struct IndexOutcome {
  index::IndexMeta meta;
  bool rebuilt = false;  // false when the index already matched the corpus
};

struct SearchHit {
  index::RankedResult result;
  corpus::CodeEntity entity;
};

struct SearchOutcome {
  annotate::QueryRecord query;
  std::vector<SearchHit> hits;

  Json to_json() const;
};

class Workspace {
 public:
  explicit Workspace(AppConfig config);

  const AppConfig& config() const { return config_; }
  annotate::AnnotationStore& store() { return *store_; }

  IngestSummary ingest(const corpus::RepoSpec& spec);
  // Repositories with a corpus file, sorted.
  std::vector<std::string> repos() const;
  // Throws Error(kPath) for an unknown repository.
  std::shared_ptr<const std::vector<corpus::CodeEntity>> corpus(const std::string& repo);

  // "bm25", "dense:<model>" or the name of a configured retriever.
  index::RetrieverConfig resolve_retriever(const std::string& spec) const;

  // No-op when the stored index was built from the same corpus and settings.
  IndexOutcome build_index(const std::string& repo, const index::RetrieverConfig& config, bool force = false);

  // Runs the query, registers it and freezes the result list. Repeating a
  // search returns the frozen list.
  SearchOutcome search(const std::string& text, const std::string& repo, const index::RetrieverConfig& config);

  annotate::LabelRecord annotate(const std::string& query_id, const std::string& entity_id, int label,
                                 const std::string& annotator_id);
  std::vector<annotate::LabelRecord> labels(const std::string& query_id) const;

  // Judges every snapshotted (query, entity) pair for the repo and retriever.
  judge::JudgeReport run_judge(const std::string& repo, const index::RetrieverConfig& config,
                               const judge::JudgeConfig& judge_config, judge::JudgeProvider& provider);
  judge::BatchStatus run_judge_batch(const std::string& repo, const index::RetrieverConfig& config,
                                     const judge::JudgeConfig& judge_config);

  // Human annotator defaults to the only human in the store.
  metrics::AgreementReport report(const std::string& repo, const index::RetrieverConfig& config,
                                  const std::string& judge_model, const std::string& human = "");

  std::vector<std::string> predefined_queries() const;

 private:
  std::vector<judge::JudgePair> judge_pairs(const std::string& repo, const index::RetrieverConfig& config);
  index::Embedder* embedder_for(const index::RetrieverConfig& config);
  std::filesystem::path corpus_path(const std::string& repo) const;

  AppConfig config_;
  std::unique_ptr<annotate::AnnotationStore> store_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const std::vector<corpus::CodeEntity>>> corpora_;
  std::map<std::string, std::shared_ptr<index::Searcher>> searchers_;
  std::unique_ptr<index::EmbeddingCache> embed_cache_;
  std::map<std::string, std::unique_ptr<index::EmbeddingProvider>> embed_providers_;
  std::map<std::string, std::unique_ptr<index::Embedder>> embedders_;
};

}  // namespace relbench::service
