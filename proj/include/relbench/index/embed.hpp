#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace relbench::index {

using Vector = std::vector<double>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string model_id() const = 0;
  virtual int dim() const = 0;
  // One vector per text. Transient failures throw Error(kProvider).
  virtual std::vector<Vector> embed_batch(const std::vector<std::string>& texts) = 0;
};

// Signed feature hashing of the sparse-index tokens into `dim` buckets.
// Needs no service; model id is "hashing-<dim>".
class HashingProvider : public EmbeddingProvider {
 public:
  explicit HashingProvider(int dim);
  std::string model_id() const override;
  int dim() const override { return dim_; }
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  int dim_;
};

// POST <url>/embed {model, texts} -> {vectors}.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string url, std::string model, int dim);
  std::string model_id() const override { return model_; }
  int dim() const override { return dim_; }
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::string url_;
  std::string model_;
  int dim_;
};

// "hashing-<dim>" selects HashingProvider; any other model goes to the HTTP
// provider configured by EMBED_URL and EMBED_DIM (EMBED_MODEL supplies the
// model when `model` is empty). Throws Error(kConfig) when unconfigured.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& model);

// Vectors keyed by (model, sha256(text)). Reads are shared, writes exclusive.
// With a file, entries are appended as JSON lines and reloaded on construction.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  explicit EmbeddingCache(std::filesystem::path file);

  std::optional<Vector> lookup(const std::string& model, const std::string& text) const;
  void store(const std::string& model, const std::string& text, const Vector& v);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::pair<std::string, std::string>, Vector> entries_;
  std::optional<std::filesystem::path> file_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{250};  // doubled after each failure
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

// Cache-first embedding with batching and retries.
class Embedder {
 public:
  Embedder(EmbeddingProvider& provider, EmbeddingCache& cache, RetryPolicy retry = {}, std::size_t batch_size = 64);

  // Throws Error(kPrecondition) for an empty list, Error(kProvider) after the
  // last failed attempt, Error(kDimensionMismatch) for wrong-sized vectors.
  std::vector<Vector> embed(const std::vector<std::string>& texts);
  Vector embed_one(const std::string& text);

  const EmbeddingProvider& provider() const { return provider_; }
  std::size_t provider_requests() const { return requests_; }

 private:
  std::vector<Vector> call_with_retry(const std::vector<std::string>& batch);

  EmbeddingProvider& provider_;
  EmbeddingCache& cache_;
  RetryPolicy retry_;
  std::size_t batch_size_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace relbench::index
