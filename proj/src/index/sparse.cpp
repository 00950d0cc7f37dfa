#include "relbench/index/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "relbench/common/error.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/text.hpp"
#include "relbench/common/tokenize.hpp"

namespace relbench::index {

namespace {

using TermCounts = std::map<std::string, std::uint32_t>;

TermCounts count_terms(const corpus::CodeEntity& e) {
  TermCounts counts;
  for (auto& t : tokenize_terms(document_text(e))) ++counts[t];
  return counts;
}

// Assembles the index from per-document term counts (vocabulary, df,
// forward lists and postings), all in sorted order.
SparseIndex assemble(std::vector<std::string> ids, const std::vector<TermCounts>& per_doc,
                     const RetrieverConfig& config, std::string hash) {
  SparseIndex idx;
  idx.config = config;
  idx.corpus_hash = std::move(hash);
  idx.entity_ids = std::move(ids);

  std::map<std::string, std::uint32_t> vocab;
  for (const auto& counts : per_doc) {
    for (const auto& [term, tf] : counts) vocab.emplace(term, 0);
  }
  std::uint32_t next = 0;
  for (auto& [term, id] : vocab) {
    id = next++;
    idx.vocabulary.push_back(term);
  }
  idx.df.assign(vocab.size(), 0);
  idx.postings.resize(vocab.size());
  idx.doc_terms.resize(per_doc.size());
  idx.lengths.assign(per_doc.size(), 0);

  double total = 0;
  for (std::size_t d = 0; d < per_doc.size(); ++d) {
    for (const auto& [term, tf] : per_doc[d]) {
      std::uint32_t id = vocab.at(term);
      idx.doc_terms[d].push_back({id, tf});
      idx.postings[id].push_back({static_cast<std::uint32_t>(d), tf});
      ++idx.df[id];
      idx.lengths[d] += tf;
    }
    total += static_cast<double>(idx.lengths[d]);
  }
  idx.avg_length = per_doc.empty() ? 0.0 : total / static_cast<double>(per_doc.size());
  return idx;
}

std::vector<std::string> ids_of(const std::vector<corpus::CodeEntity>& entities) {
  std::vector<std::string> ids;
  ids.reserve(entities.size());
  for (const auto& e : entities) ids.push_back(e.entity_id);
  return ids;
}

void require_corpus(const std::vector<corpus::CodeEntity>& entities) {
  if (entities.empty()) throw Error(ErrorCode::kPrecondition, "cannot index an empty corpus");
}

// Contribution of one query-term occurrence to one document.
inline double term_score(double idf, double tf, double len, double avg, double k1, double b) {
  double norm = avg > 0 ? len / avg : 0.0;
  return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
}

struct QueryTerm {
  std::uint32_t id;
  double idf;
};

std::vector<QueryTerm> resolve(const SparseIndex& index, const std::vector<std::string>& query_terms) {
  std::vector<QueryTerm> out;
  auto n = static_cast<std::int64_t>(index.entity_ids.size());
  for (const auto& t : query_terms) {
    if (auto id = index.term_id(t)) out.push_back({*id, bm25_idf(n, index.df[*id])});
  }
  return out;
}

}  // namespace

std::optional<std::uint32_t> SparseIndex::term_id(std::string_view term) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
  if (it == vocabulary.end() || *it != term) return std::nullopt;
  return static_cast<std::uint32_t>(it - vocabulary.begin());
}

SparseIndex build_sparse_index(const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config) {
  require_corpus(entities);
  config.validate();
  std::vector<TermCounts> per_doc(entities.size());
  const long n = static_cast<long>(entities.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) per_doc[i] = count_terms(entities[i]);
  return assemble(ids_of(entities), per_doc, config, corpus_hash(entities));
}

SparseIndex build_sparse_index_serial(const std::vector<corpus::CodeEntity>& entities, const RetrieverConfig& config) {
  require_corpus(entities);
  config.validate();
  std::vector<TermCounts> per_doc;
  per_doc.reserve(entities.size());
  for (const auto& e : entities) per_doc.push_back(count_terms(e));
  return assemble(ids_of(entities), per_doc, config, corpus_hash(entities));
}

double bm25_idf(std::int64_t n_docs, std::int64_t df) {
  double n = static_cast<double>(n_docs), f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

std::vector<double> bm25_scores(const SparseIndex& index, const std::vector<std::string>& query_terms) {
  const std::vector<QueryTerm> q = resolve(index, query_terms);
  const double k1 = index.config.k1, b = index.config.b, avg = index.avg_length;
  std::vector<double> scores(index.entity_ids.size(), 0.0);
  if (q.empty()) return scores;
  const long n = static_cast<long>(scores.size());
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) {
    const auto& terms = index.doc_terms[d];
    double len = static_cast<double>(index.lengths[d]);
    double s = 0.0;
    for (const QueryTerm& qt : q) {
      auto it = std::lower_bound(terms.begin(), terms.end(), SparseIndex::Entry{qt.id, 0},
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
      if (it == terms.end() || it->first != qt.id) continue;
      s += term_score(qt.idf, it->second, len, avg, k1, b);
    }
    scores[d] = s;
  }
  return scores;
}

std::vector<double> bm25_scores_serial(const SparseIndex& index, const std::vector<std::string>& query_terms) {
  const std::vector<QueryTerm> q = resolve(index, query_terms);
  const double k1 = index.config.k1, b = index.config.b, avg = index.avg_length;
  std::vector<double> scores(index.entity_ids.size(), 0.0);
  for (const QueryTerm& qt : q) {
    for (const auto& [d, tf] : index.postings[qt.id]) {
      scores[d] += term_score(qt.idf, tf, static_cast<double>(index.lengths[d]), avg, k1, b);
    }
  }
  return scores;
}

std::vector<RankedResult> bm25_search(const SparseIndex& index, std::string_view query, int k) {
  std::vector<std::string> terms = tokenize_terms(query);
  if (terms.empty()) return {};
  return top_k(index.entity_ids, bm25_scores(index, terms), k, true);
}

void save_sparse_index(const SparseIndex& index, const std::filesystem::path& dir) {
  Json j;
  j["format"] = "relbench-bm25-1";
  j["config"] = index.config.to_json();
  j["corpus_hash"] = index.corpus_hash;
  j["documents"] = index.entity_ids.size();
  j["avg_length"] = index.avg_length;
  j["vocabulary"] = index.vocabulary;
  j["df"] = index.df;
  Json docs = Json::array();
  for (std::size_t d = 0; d < index.entity_ids.size(); ++d) {
    Json terms = Json::array();
    for (const auto& [id, tf] : index.doc_terms[d]) terms.push_back({id, tf});
    docs.push_back({{"entity_id", index.entity_ids[d]}, {"length", index.lengths[d]}, {"terms", std::move(terms)}});
  }
  j["docs"] = std::move(docs);
  write_file_atomic((dir / "index.json").string(), j.dump() + "\n");
}

SparseIndex load_sparse_index(const std::filesystem::path& dir) {
  std::filesystem::path file = dir / "index.json";
  if (!std::filesystem::exists(file)) throw Error(ErrorCode::kMissingIndex, "no index at " + dir.string());
  try {
    Json j = Json::parse(read_file(file.string()));
    if (j.at("format") != "relbench-bm25-1") throw Error(ErrorCode::kParse, "not a BM25 index: " + file.string());
    SparseIndex idx;
    idx.config = RetrieverConfig::from_json(j.at("config"));
    idx.corpus_hash = j.at("corpus_hash").get<std::string>();
    idx.avg_length = j.at("avg_length").get<double>();
    idx.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    idx.df = j.at("df").get<std::vector<std::int64_t>>();
    idx.postings.resize(idx.vocabulary.size());
    for (const auto& doc : j.at("docs")) {
      auto d = static_cast<std::uint32_t>(idx.entity_ids.size());
      idx.entity_ids.push_back(doc.at("entity_id").get<std::string>());
      idx.lengths.push_back(doc.at("length").get<std::int64_t>());
      auto& terms = idx.doc_terms.emplace_back();
      for (const auto& t : doc.at("terms")) {
        auto id = t.at(0).get<std::uint32_t>();
        auto tf = t.at(1).get<std::uint32_t>();
        if (id >= idx.vocabulary.size()) throw Error(ErrorCode::kParse, "term id out of range in " + file.string());
        terms.push_back({id, tf});
        idx.postings[id].push_back({d, tf});
      }
    }
    return idx;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, file.string() + ": " + e.what());
  }
}

}  // namespace relbench::index
