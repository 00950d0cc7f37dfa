#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relbench/index/retriever.hpp"

namespace relbench::index {

struct SparseIndex {
  RetrieverConfig config;
  std::string corpus_hash;
  std::vector<std::string> entity_ids;  // corpus order
  std::vector<std::int64_t> lengths;    // tokens per document
  double avg_length = 0.0;
  std::vector<std::string> vocabulary;  // sorted
  std::vector<std::int64_t> df;         // per vocabulary entry

  using Entry = std::pair<std::uint32_t, std::uint32_t>;
  std::vector<std::vector<Entry>> doc_terms;  // per document: (term, tf) by term
  std::vector<std::vector<Entry>> postings;   // per term: (document, tf) by document

  std::optional<std::uint32_t> term_id(std::string_view term) const;
};

// Throws Error(kPrecondition) for an empty corpus. Tokenization runs in
// parallel across documents; the result equals build_sparse_index_serial.
SparseIndex build_sparse_index(const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config);
SparseIndex build_sparse_index_serial(const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config);

double bm25_idf(std::int64_t n_docs, std::int64_t df);

// BM25 score of every document for the query terms (duplicates count once
// per occurrence). The parallel kernel walks documents; the serial one walks
// postings. Both add term contributions in query order, so results are equal.
std::vector<double> bm25_scores(const SparseIndex& index, const std::vector<std::string>& query_terms);
std::vector<double> bm25_scores_serial(const SparseIndex& index, const std::vector<std::string>& query_terms);

std::vector<RankedResult> bm25_search(const SparseIndex& index, std::string_view query, int k);

void save_sparse_index(const SparseIndex& index, const std::filesystem::path& dir);
SparseIndex load_sparse_index(const std::filesystem::path& dir);

}  // namespace relbench::index
