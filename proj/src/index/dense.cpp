#include "relbench/index/dense.hpp"

#include <cmath>
#include <limits>

#include "relbench/common/error.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/text.hpp"

namespace relbench::index {

namespace {

double norm_of(const double* v, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double query_norm(const DenseIndex& index, const std::vector<double>& query) {
  if (static_cast<int>(query.size()) != index.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "query has dimension " + std::to_string(query.size()) +
                                                   ", index has " + std::to_string(index.dim));
  }
  double qn = norm_of(query.data(), index.dim);
  if (qn == 0.0) throw Error(ErrorCode::kPrecondition, "query embedding has zero norm");
  return qn;
}

inline double cosine(const DenseIndex& index, std::size_t d, const std::vector<double>& query, double qn) {
  if (index.norms[d] == 0.0) return -std::numeric_limits<double>::infinity();
  const double* v = index.vectors.data() + d * index.dim;
  double dot = 0.0;
  for (int i = 0; i < index.dim; ++i) dot += v[i] * query[i];
  return dot / (index.norms[d] * qn);
}

}  // namespace

DenseIndex make_dense_index(std::vector<std::string> entity_ids, const std::vector<std::vector<double>>& vectors,
                            const RetrieverConfig& config) {
  if (entity_ids.size() != vectors.size()) throw Error(ErrorCode::kPrecondition, "one vector per entity required");
  if (vectors.empty()) throw Error(ErrorCode::kPrecondition, "cannot index an empty corpus");
  DenseIndex idx;
  idx.config = config;
  idx.dim = static_cast<int>(vectors.front().size());
  idx.entity_ids = std::move(entity_ids);
  idx.vectors.reserve(vectors.size() * idx.dim);
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != idx.dim) {
      throw Error(ErrorCode::kDimensionMismatch, "vectors of dimension " + std::to_string(v.size()) + " and " +
                                                     std::to_string(idx.dim) + " in one index");
    }
    idx.vectors.insert(idx.vectors.end(), v.begin(), v.end());
    idx.norms.push_back(norm_of(v.data(), idx.dim));
  }
  return idx;
}

DenseIndex build_dense_index(const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config,
                             Embedder& embedder) {
  config.validate();
  if (entities.empty()) throw Error(ErrorCode::kPrecondition, "cannot index an empty corpus");
  if (embedder.provider().model_id() != config.model_id) {
    throw Error(ErrorCode::kConfig, "embedder serves " + embedder.provider().model_id() + ", index wants " +
                                        config.model_id);
  }
  std::vector<std::string> texts, ids;
  for (const auto& e : entities) {
    texts.push_back(document_text(e));
    ids.push_back(e.entity_id);
  }
  DenseIndex idx = make_dense_index(std::move(ids), embedder.embed(texts), config);
  idx.corpus_hash = corpus_hash(entities);
  return idx;
}

std::vector<double> cosine_scores(const DenseIndex& index, const std::vector<double>& query) {
  const double qn = query_norm(index, query);
  std::vector<double> scores(index.entity_ids.size());
  const long n = static_cast<long>(scores.size());
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) scores[d] = cosine(index, d, query, qn);
  return scores;
}

std::vector<double> cosine_scores_serial(const DenseIndex& index, const std::vector<double>& query) {
  const double qn = query_norm(index, query);
  std::vector<double> scores;
  scores.reserve(index.entity_ids.size());
  for (std::size_t d = 0; d < index.entity_ids.size(); ++d) scores.push_back(cosine(index, d, query, qn));
  return scores;
}

std::vector<RankedResult> dense_search(const DenseIndex& index, const std::vector<double>& query, int k) {
  return top_k(index.entity_ids, cosine_scores(index, query), k, false);
}

void save_dense_index(const DenseIndex& index, const std::filesystem::path& dir) {
  Json j;
  j["format"] = "relbench-dense-1";
  j["config"] = index.config.to_json();
  j["corpus_hash"] = index.corpus_hash;
  j["dim"] = index.dim;
  Json docs = Json::array();
  for (std::size_t d = 0; d < index.entity_ids.size(); ++d) {
    auto first = index.vectors.begin() + static_cast<long>(d * index.dim);
    docs.push_back({{"entity_id", index.entity_ids[d]}, {"vector", std::vector<double>(first, first + index.dim)}});
  }
  j["docs"] = std::move(docs);
  write_file_atomic((dir / "index.json").string(), j.dump() + "\n");
}

DenseIndex load_dense_index(const std::filesystem::path& dir) {
  std::filesystem::path file = dir / "index.json";
  if (!std::filesystem::exists(file)) throw Error(ErrorCode::kMissingIndex, "no index at " + dir.string());
  try {
    Json j = Json::parse(read_file(file.string()));
    if (j.at("format") != "relbench-dense-1") throw Error(ErrorCode::kParse, "not a dense index: " + file.string());
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vectors;
    for (const auto& doc : j.at("docs")) {
      ids.push_back(doc.at("entity_id").get<std::string>());
      vectors.push_back(doc.at("vector").get<std::vector<double>>());
    }
    DenseIndex idx = make_dense_index(std::move(ids), vectors, RetrieverConfig::from_json(j.at("config")));
    idx.corpus_hash = j.at("corpus_hash").get<std::string>();
    if (idx.dim != j.at("dim").get<int>()) throw Error(ErrorCode::kParse, "dimension mismatch in " + file.string());
    return idx;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, file.string() + ": " + e.what());
  }
}

}  // namespace relbench::index
