#include "relbench/index/embed.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "relbench/common/error.hpp"
#include "relbench/common/hash.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/tokenize.hpp"
#include "relbench/net/http.hpp"

namespace relbench::index {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

int parse_dim(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    int d = std::stoi(text, &used);
    if (used == text.size() && d > 0) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kConfig, what + " must be a positive integer, got '" + text + "'");
}

}  // namespace

HashingProvider::HashingProvider(int dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorCode::kConfig, "embedding dimension must be positive");
}

std::string HashingProvider::model_id() const { return "hashing-" + std::to_string(dim_); }

std::vector<Vector> HashingProvider::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Vector v(dim_, 0.0);
    for (const auto& term : tokenize_terms(text)) {
      std::uint64_t h = fnv1a(term);
      v[h % static_cast<std::uint64_t>(dim_)] += (h >> 63) ? -1.0 : 1.0;
    }
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, std::string model, int dim)
    : url_(std::move(url)), model_(std::move(model)), dim_(dim) {}

std::vector<Vector> HttpEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
  net::HttpClient client(url_);
  Json body = {{"model", model_}, {"texts", texts}};
  net::HttpResponse res = client.post_json("/embed", body.dump(-1, ' ', false, Json::error_handler_t::replace));
  if (res.status == 0) throw Error(ErrorCode::kProvider, "embedding request failed: " + res.transport_error);
  if (!res.ok()) throw Error(ErrorCode::kProvider, "embedding service returned HTTP " + std::to_string(res.status));
  try {
    auto vectors = Json::parse(res.body).at("vectors").get<std::vector<Vector>>();
    if (vectors.size() != texts.size()) {
      throw Error(ErrorCode::kProvider, "embedding service returned " + std::to_string(vectors.size()) +
                                            " vectors for " + std::to_string(texts.size()) + " texts");
    }
    return vectors;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kProvider, std::string("malformed embedding response: ") + e.what());
  }
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& model) {
  std::string m = model.empty() ? env_or_empty("EMBED_MODEL") : model;
  if (m.rfind("hashing-", 0) == 0) return std::make_unique<HashingProvider>(parse_dim(m.substr(8), "hashing dimension"));
  if (m.empty()) throw Error(ErrorCode::kConfig, "no embedding model given and EMBED_MODEL is unset");
  std::string url = env_or_empty("EMBED_URL");
  if (url.empty()) throw Error(ErrorCode::kConfig, "EMBED_URL is required for embedding model " + m);
  std::string dim = env_or_empty("EMBED_DIM");
  if (dim.empty()) throw Error(ErrorCode::kConfig, "EMBED_DIM is required for embedding model " + m);
  return std::make_unique<HttpEmbeddingProvider>(url, m, parse_dim(dim, "EMBED_DIM"));
}

EmbeddingCache::EmbeddingCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(*file_)) return;
  for (const auto& row : read_jsonl(file_->string())) {
    try {
      entries_[{row.at("model").get<std::string>(), row.at("key").get<std::string>()}] =
          row.at("vector").get<Vector>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, file_->string() + ": " + e.what());
    }
  }
}

std::optional<Vector> EmbeddingCache::lookup(const std::string& model, const std::string& text) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find({model, sha256_hex(text)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::store(const std::string& model, const std::string& text, const Vector& v) {
  std::string key = sha256_hex(text);
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.insert_or_assign({model, key}, v);
  if (file_ && inserted) {
    std::filesystem::create_directories(file_->parent_path());
    append_jsonl_line(file_->string(), Json{{"model", model}, {"key", key}, {"vector", v}});
  }
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

Embedder::Embedder(EmbeddingProvider& provider, EmbeddingCache& cache, RetryPolicy retry, std::size_t batch_size)
    : provider_(provider), cache_(cache), retry_(std::move(retry)), batch_size_(batch_size ? batch_size : 1) {
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (retry_.attempts < 1) retry_.attempts = 1;
}

std::vector<Vector> Embedder::call_with_retry(const std::vector<std::string>& batch) {
  std::chrono::milliseconds delay = retry_.base_delay;
  for (int attempt = 1;; ++attempt) {
    ++requests_;
    try {
      return provider_.embed_batch(batch);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kProvider) throw;
      if (attempt >= retry_.attempts) {
        throw Error(ErrorCode::kProvider,
                    "embedding failed after " + std::to_string(attempt) + " attempts: " + e.what());
      }
    }
    retry_.sleep(delay);
    delay *= 2;
  }
}

std::vector<Vector> Embedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorCode::kPrecondition, "nothing to embed");
  const std::string model = provider_.model_id();
  std::vector<Vector> out(texts.size());
  std::vector<std::string> missing;
  std::unordered_map<std::string, std::vector<std::size_t>> waiting;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto hit = cache_.lookup(model, texts[i])) {
      out[i] = std::move(*hit);
    } else {
      auto& slots = waiting[texts[i]];
      if (slots.empty()) missing.push_back(texts[i]);
      slots.push_back(i);
    }
  }
  for (std::size_t start = 0; start < missing.size(); start += batch_size_) {
    std::vector<std::string> batch(missing.begin() + start,
                                   missing.begin() + std::min(missing.size(), start + batch_size_));
    std::vector<Vector> vectors = call_with_retry(batch);
    if (vectors.size() != batch.size()) {
      throw Error(ErrorCode::kProvider, "provider returned " + std::to_string(vectors.size()) + " vectors for " +
                                            std::to_string(batch.size()) + " texts");
    }
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (static_cast<int>(vectors[j].size()) != provider_.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "model " + model + " returned a vector of dimension " +
                                                       std::to_string(vectors[j].size()) + ", expected " +
                                                       std::to_string(provider_.dim()));
      }
      cache_.store(model, batch[j], vectors[j]);
      for (std::size_t slot : waiting[batch[j]]) out[slot] = vectors[j];
    }
  }
  return out;
}

Vector Embedder::embed_one(const std::string& text) { return embed({text}).front(); }

}  // namespace relbench::index
