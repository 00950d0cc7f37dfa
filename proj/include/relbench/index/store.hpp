#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "relbench/index/embed.hpp"
#include "relbench/index/retriever.hpp"

namespace relbench::index {

// <data_dir>/index/<repo>/<retriever name>
std::filesystem::path index_dir(const std::filesystem::path& data_dir, const std::string& repo,
                                const RetrieverConfig& config);

struct IndexMeta {
  RetrieverConfig config;
  std::string corpus_hash;
  std::size_t documents = 0;
};

// Builds the index for `config` and writes it with a meta.json next to it.
// Dense configs need an embedder whose provider serves config.model_id.
IndexMeta build_index(const std::filesystem::path& data_dir, const std::string& repo,
                      const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config,
                      Embedder* embedder);

// Throws Error(kMissingIndex) when no index has been built.
IndexMeta read_index_meta(const std::filesystem::path& data_dir, const std::string& repo,
                          const RetrieverConfig& config);

class Searcher {
 public:
  virtual ~Searcher() = default;
  // Safe to call from several threads at once.
  virtual std::vector<RankedResult> search(std::string_view query, int k) const = 0;
  virtual const IndexMeta& meta() const = 0;
};

// Throws Error(kMissingIndex) when the index is absent, Error(kConfig) when a
// dense index is opened with an embedder for a different model.
std::unique_ptr<Searcher> open_searcher(const std::filesystem::path& data_dir, const std::string& repo,
                                        const RetrieverConfig& config, Embedder* embedder);

}  // namespace relbench::index
