#include "relbench/index/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "relbench/common/error.hpp"
#include "relbench/common/hash.hpp"

namespace relbench::index {

void RetrieverConfig::validate() const {
  if (cutoff < 1) throw Error(ErrorCode::kConfig, "cutoff must be at least 1");
  if (kind == RetrieverKind::kDense) {
    if (model_id.empty()) throw Error(ErrorCode::kConfig, "dense retriever needs a model id");
  } else {
    if (!(k1 > 0)) throw Error(ErrorCode::kConfig, "k1 must be positive");
    if (!(b >= 0 && b <= 1)) throw Error(ErrorCode::kConfig, "b must lie in [0, 1]");
  }
}

std::string RetrieverConfig::name() const {
  if (kind == RetrieverKind::kSparseBm25) return "bm25";
  std::string safe;
  for (char c : model_id) safe += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  return "dense-" + safe;
}

std::string RetrieverConfig::fingerprint() const {
  if (kind == RetrieverKind::kSparseBm25) {
    return "bm25(k1=" + Json(k1).dump() + ",b=" + Json(b).dump() + ",cutoff=" + std::to_string(cutoff) + ")";
  }
  return "dense(model=" + model_id + ",cutoff=" + std::to_string(cutoff) + ")";
}

Json RetrieverConfig::to_json() const {
  Json j;
  j["kind"] = kind == RetrieverKind::kSparseBm25 ? "sparse_bm25" : "dense";
  if (kind == RetrieverKind::kDense) {
    j["model_id"] = model_id;
  } else {
    j["k1"] = k1;
    j["b"] = b;
  }
  j["cutoff"] = cutoff;
  return j;
}

RetrieverConfig RetrieverConfig::from_json(const Json& j) {
  RetrieverConfig c;
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "sparse_bm25") {
      c.kind = RetrieverKind::kSparseBm25;
      c.k1 = j.value("k1", 1.5);
      c.b = j.value("b", 0.75);
    } else if (kind == "dense") {
      c.kind = RetrieverKind::kDense;
      c.model_id = j.at("model_id").get<std::string>();
    } else {
      throw Error(ErrorCode::kConfig, "unknown retriever kind: " + kind);
    }
    c.cutoff = j.value("cutoff", 10);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad retriever config: ") + e.what());
  }
  c.validate();
  return c;
}

RetrieverConfig RetrieverConfig::parse(std::string_view spec) {
  RetrieverConfig c;
  if (spec == "bm25" || spec == "sparse_bm25") {
    c.kind = RetrieverKind::kSparseBm25;
  } else if (spec.substr(0, 6) == "dense:") {
    c.kind = RetrieverKind::kDense;
    c.model_id = std::string(spec.substr(6));
  } else {
    throw Error(ErrorCode::kConfig, "retriever must be bm25 or dense:<model>, got " + std::string(spec));
  }
  c.validate();
  return c;
}

std::string document_text(const corpus::CodeEntity& e) {
  if (e.docstring.empty()) return e.code;
  return e.docstring + "\n" + e.code;
}

std::vector<RankedResult> top_k(const std::vector<std::string>& entity_ids, const std::vector<double>& scores,
                                int k, bool drop_zero) {
  std::vector<std::size_t> order;
  order.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (drop_zero && scores[i] == 0.0) continue;
    order.push_back(i);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return entity_ids[a] < entity_ids[b];
  };
  std::size_t keep = std::min<std::size_t>(order.size(), k < 0 ? 0 : static_cast<std::size_t>(k));
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), better);
  std::vector<RankedResult> out;
  out.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    out.push_back({entity_ids[order[r]], static_cast<int>(r + 1), scores[order[r]]});
  }
  return out;
}

std::string corpus_hash(const std::vector<corpus::CodeEntity>& entities) {
  std::string joined;
  for (const auto& e : entities) {
    joined += e.entity_id;
    joined += '\n';
  }
  return sha256_hex(joined);
}

}  // namespace relbench::index
