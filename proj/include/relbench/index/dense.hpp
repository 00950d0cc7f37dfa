#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relbench/index/embed.hpp"
#include "relbench/index/retriever.hpp"

namespace relbench::index {

struct DenseIndex {
  RetrieverConfig config;
  std::string corpus_hash;
  int dim = 0;
  std::vector<std::string> entity_ids;
  std::vector<double> vectors;  // row-major, entity_ids.size() x dim
  std::vector<double> norms;
};

// Embeds document_text() of every entity. Throws Error(kPrecondition) for an
// empty corpus.
DenseIndex build_dense_index(const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config,
                             Embedder& embedder);
DenseIndex make_dense_index(std::vector<std::string> entity_ids, const std::vector<std::vector<double>>& vectors,
                            const RetrieverConfig& config);

// Cosine similarity of every document to the query; zero-norm documents get
// -infinity. Throws Error(kPrecondition) for a zero-norm query and
// Error(kDimensionMismatch) when the query has the wrong length.
std::vector<double> cosine_scores(const DenseIndex& index, const std::vector<double>& query);
std::vector<double> cosine_scores_serial(const DenseIndex& index, const std::vector<double>& query);

std::vector<RankedResult> dense_search(const DenseIndex& index, const std::vector<double>& query, int k);

void save_dense_index(const DenseIndex& index, const std::filesystem::path& dir);
DenseIndex load_dense_index(const std::filesystem::path& dir);

}  // namespace relbench::index
