#include "relbench/index/store.hpp"

#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"
#include "relbench/common/tokenize.hpp"
#include "relbench/index/dense.hpp"
#include "relbench/index/sparse.hpp"

namespace relbench::index {

namespace fs = std::filesystem;

namespace {

void write_meta(const fs::path& dir, const IndexMeta& meta) {
  Json j;
  j["config"] = meta.config.to_json();
  j["fingerprint"] = meta.config.fingerprint();
  j["corpus_hash"] = meta.corpus_hash;
  j["documents"] = meta.documents;
  write_file_atomic((dir / "meta.json").string(), j.dump(2) + "\n");
}

class SparseSearcher : public Searcher {
 public:
  SparseSearcher(SparseIndex index, IndexMeta meta) : index_(std::move(index)), meta_(std::move(meta)) {}
  std::vector<RankedResult> search(std::string_view query, int k) const override {
    return bm25_search(index_, query, k);
  }
  const IndexMeta& meta() const override { return meta_; }

 private:
  SparseIndex index_;
  IndexMeta meta_;
};

class DenseSearcher : public Searcher {
 public:
  DenseSearcher(DenseIndex index, IndexMeta meta, Embedder& embedder)
      : index_(std::move(index)), meta_(std::move(meta)), embedder_(embedder) {}
  std::vector<RankedResult> search(std::string_view query, int k) const override {
    return dense_search(index_, embedder_.embed_one(std::string(query)), k);
  }
  const IndexMeta& meta() const override { return meta_; }

 private:
  DenseIndex index_;
  IndexMeta meta_;
  Embedder& embedder_;
};

void check_embedder(const RetrieverConfig& config, const Embedder* embedder) {
  if (!embedder) throw Error(ErrorCode::kConfig, "dense retriever " + config.model_id + " needs an embedding provider");
  if (embedder->provider().model_id() != config.model_id) {
    throw Error(ErrorCode::kConfig,
                "embedding provider serves " + embedder->provider().model_id() + ", retriever wants " + config.model_id);
  }
}

}  // namespace

fs::path index_dir(const fs::path& data_dir, const std::string& repo, const RetrieverConfig& config) {
  return data_dir / "index" / repo / config.name();
}

IndexMeta build_index(const fs::path& data_dir, const std::string& repo,
                      const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config,
                      Embedder* embedder) {
  config.validate();
  fs::path dir = index_dir(data_dir, repo, config);
  IndexMeta meta{config, corpus_hash(entities), entities.size()};
  if (config.kind == RetrieverKind::kSparseBm25) {
    save_sparse_index(build_sparse_index(entities, config), dir);
  } else {
    check_embedder(config, embedder);
    save_dense_index(build_dense_index(entities, config, *embedder), dir);
  }
  write_meta(dir, meta);
  return meta;
}

IndexMeta read_index_meta(const fs::path& data_dir, const std::string& repo, const RetrieverConfig& config) {
  fs::path file = index_dir(data_dir, repo, config) / "meta.json";
  if (!fs::exists(file)) {
    throw Error(ErrorCode::kMissingIndex, "no " + config.name() + " index for repo " + repo + "; run index first");
  }
  try {
    Json j = Json::parse(read_file(file.string()));
    return IndexMeta{RetrieverConfig::from_json(j.at("config")), j.at("corpus_hash").get<std::string>(),
                     j.at("documents").get<std::size_t>()};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, file.string() + ": " + e.what());
  }
}

std::unique_ptr<Searcher> open_searcher(const fs::path& data_dir, const std::string& repo,
                                        const RetrieverConfig& config, Embedder* embedder) {
  IndexMeta meta = read_index_meta(data_dir, repo, config);
  fs::path dir = index_dir(data_dir, repo, config);
  if (config.kind == RetrieverKind::kSparseBm25) {
    return std::make_unique<SparseSearcher>(load_sparse_index(dir), std::move(meta));
  }
  check_embedder(config, embedder);
  return std::make_unique<DenseSearcher>(load_dense_index(dir), std::move(meta), *embedder);
}

}  // namespace relbench::index
