#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "relbench/common/jsonl.hpp"
#include "relbench/corpus/corpus.hpp"

namespace relbench::index {

enum class RetrieverKind { kSparseBm25, kDense };

struct RetrieverConfig {
  RetrieverKind kind = RetrieverKind::kSparseBm25;
  std::string model_id;  // dense only
  double k1 = 1.5;
  double b = 0.75;
  int cutoff = 10;

  // Throws Error(kConfig) on out-of-range parameters or a dense config
  // without a model.
  void validate() const;

  // Directory-safe identifier: "bm25" or "dense-<model>".
  std::string name() const;
  // Every parameter that affects ranking; stored with indexes and snapshots.
  std::string fingerprint() const;

  Json to_json() const;
  static RetrieverConfig from_json(const Json& j);
  // "bm25" or "dense:<model_id>"; the result is validated.
  static RetrieverConfig parse(std::string_view spec);
};

struct RankedResult {
  std::string entity_id;
  int rank = 0;
  double score = 0.0;

  bool operator==(const RankedResult&) const = default;
};

// Text that is indexed and embedded for an entity: the docstring, a newline,
// then the code. Entities without documentation contribute the code alone.
std::string document_text(const corpus::CodeEntity& e);

// Ranks documents by descending score, breaking ties by ascending entity id,
// and keeps the first k. With drop_zero, documents scoring exactly 0 are left out.
std::vector<RankedResult> top_k(const std::vector<std::string>& entity_ids, const std::vector<double>& scores,
                                int k, bool drop_zero);

// Content hash over the entity ids in corpus order.
std::string corpus_hash(const std::vector<corpus::CodeEntity>& entities);

}  // namespace relbench::index
