#include <gtest/gtest.h>
#include <httplib.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"
#include "relbench/index/dense.hpp"
#include "relbench/index/embed.hpp"
#include "relbench/index/sparse.hpp"
#include "relbench/index/store.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace relbench;
using namespace relbench::index;
using corpus::CodeEntity;
using namespace relbench::oracle;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("relbench_index_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CodeEntity entity(const std::string& id, const std::string& code, const std::string& doc = "") {
  CodeEntity e;
  e.entity_id = id;
  e.repo = "r";
  e.rel_path = "f";
  e.function_name = id;
  e.code = code;
  e.docstring = doc;
  e.start_line = e.end_line = 1;
  return e;
}

std::vector<CodeEntity> toy(const std::vector<std::string>& docs) {
  std::vector<CodeEntity> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "e%03zu", i + 1);
    out.push_back(entity(id, docs[i]));
  }
  return out;
}

void expect_error(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

std::vector<std::string> ids_of(const std::vector<RankedResult>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.entity_id);
  return out;
}

// Returns preset vectors and counts calls; can fail a set number of times.
class ScriptedProvider : public EmbeddingProvider {
 public:
  explicit ScriptedProvider(int dim) : dim_(dim) {}
  std::string model_id() const override { return "scripted"; }
  int dim() const override { return dim_; }
  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) override {
    ++calls;
    if (failures_left > 0) {
      --failures_left;
      throw Error(ErrorCode::kProvider, "simulated outage");
    }
    std::vector<Vector> out;
    for (const auto& t : texts) {
      Vector v(wrong_dim ? dim_ + 1 : dim_, 0.0);
      v[std::hash<std::string>{}(t) % dim_] = 1.0;
      out.push_back(v);
      seen.push_back(t);
    }
    return out;
  }
  int calls = 0;
  int failures_left = 0;
  bool wrong_dim = false;
  std::vector<std::string> seen;

 private:
  int dim_;
};

RetryPolicy no_sleep(std::vector<long>* delays = nullptr) {
  RetryPolicy p;
  p.sleep = [delays](std::chrono::milliseconds d) {
    if (delays) delays->push_back(static_cast<long>(d.count()));
  };
  return p;
}

}  // namespace

TEST(RetrieverConfig, ValidationAndNames) {
  RetrieverConfig c;
  EXPECT_EQ(c.name(), "bm25");
  EXPECT_EQ(c.fingerprint(), "bm25(k1=1.5,b=0.75,cutoff=10)");
  c.b = 1.5;
  expect_error(ErrorCode::kConfig, [&] { c.validate(); });
  c = RetrieverConfig::parse("dense:org/model-v2");
  EXPECT_EQ(c.kind, RetrieverKind::kDense);
  EXPECT_EQ(c.name(), "dense-org_model-v2");
  expect_error(ErrorCode::kConfig, [] { RetrieverConfig::parse("dense:"); });
  expect_error(ErrorCode::kConfig, [] { RetrieverConfig::parse("tfidf"); });
  RetrieverConfig zero;
  zero.cutoff = 0;
  expect_error(ErrorCode::kConfig, [&] { zero.validate(); });
  EXPECT_EQ(RetrieverConfig::from_json(c.to_json()).fingerprint(), c.fingerprint());
}

TEST(DocumentText, DocThenCode) {
  EXPECT_EQ(document_text(entity("a", "int f();", "Doc.")), "Doc.\nint f();");
  EXPECT_EQ(document_text(entity("a", "int f();")), "int f();");
}

TEST(Sparse, HandTabulatedTables) {
  SparseIndex idx = build_sparse_index(toy({"push stack", "pop stack", "hash map"}), {});
  EXPECT_EQ(idx.vocabulary, (std::vector<std::string>{"hash", "map", "pop", "push", "stack"}));
  EXPECT_EQ(idx.df, (std::vector<std::int64_t>{1, 1, 1, 1, 2}));
  EXPECT_EQ(idx.lengths, (std::vector<std::int64_t>{2, 2, 2}));
  EXPECT_DOUBLE_EQ(idx.avg_length, 2.0);
  EXPECT_EQ(idx.postings[4], (std::vector<SparseIndex::Entry>{{0, 1}, {1, 1}}));
}

TEST(Sparse, CodeTokensAreSplit) {
  SparseIndex idx = build_sparse_index({entity("a", "int pushStack(stack_t *s);", "Push onto HTTPServer.")}, {});
  EXPECT_EQ(idx.vocabulary,
            (std::vector<std::string>{"http", "int", "onto", "push", "s", "server", "stack", "t"}));
  EXPECT_EQ(idx.lengths[0], 10);
}

TEST(Sparse, SingleDocumentAverage) {
  SparseIndex idx = build_sparse_index(toy({"a b c d e"}), {});
  EXPECT_DOUBLE_EQ(idx.avg_length, 5.0);
}

TEST(Sparse, EmptyCorpusIsError) {
  expect_error(ErrorCode::kPrecondition, [] { build_sparse_index({}, {}); });
}

TEST(Sparse, ToyStackQuery) {
  auto docs = toy({"push stack", "pop stack", "hash map"});
  SparseIndex idx = build_sparse_index(docs, {});
  auto rs = bm25_search(idx, "stack", 10);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(ids_of(rs), (std::vector<std::string>{"e001", "e002"}));
  auto want = brute_bm25({{"push", "stack"}, {"pop", "stack"}, {"hash", "map"}}, {"stack"}, 1.5, 0.75);
  EXPECT_EQ(rs[0].score, want[0]);
  EXPECT_EQ(rs[1].score, want[1]);
  // ln(1 + (3 - 2 + 0.5) / (2 + 0.5)) with tf = 1 and len = avg.
  EXPECT_NEAR(rs[0].score, std::log(1.6), 1e-15);
  EXPECT_EQ(rs[0].rank, 1);
  EXPECT_EQ(rs[1].rank, 2);
}

TEST(Sparse, AbsentTermAndEmptyQuery) {
  SparseIndex idx = build_sparse_index(toy({"push stack", "pop stack"}), {});
  EXPECT_TRUE(bm25_search(idx, "queue", 10).empty());
  EXPECT_TRUE(bm25_search(idx, "  ;; -- ", 10).empty());
}

TEST(Sparse, IdenticalDocumentsTieByEntityId) {
  std::vector<CodeEntity> docs = {entity("zeta", "sort list"), entity("alpha", "sort list"), entity("mid", "sort list")};
  auto rs = bm25_search(build_sparse_index(docs, {}), "sort", 10);
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(ids_of(rs), (std::vector<std::string>{"alpha", "mid", "zeta"}));
  EXPECT_EQ(rs[0].score, rs[2].score);
}

TEST(Sparse, RandomCorporaMatchBruteForce) {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 200; ++trial) {
    int vocab = 1 + static_cast<int>(rng() % 20);
    int n_docs = 1 + static_cast<int>(rng() % 50);
    std::vector<std::vector<std::string>> raw(n_docs);
    std::vector<std::string> texts;
    for (auto& d : raw) {
      int len = 1 + static_cast<int>(rng() % 12);
      for (int i = 0; i < len; ++i) d.push_back("w" + std::string(1, static_cast<char>('a' + rng() % vocab)));
      texts.push_back(join(d, " "));
    }
    auto entities = toy(texts);
    // Shuffle ids so tie-breaks are not in corpus order.
    std::vector<std::string> ids;
    for (auto& e : entities) ids.push_back(e.entity_id);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < ids.size(); ++i) entities[i].entity_id = ids[i];
    RetrieverConfig cfg;
    SparseIndex idx = build_sparse_index(entities, cfg);

    std::vector<std::string> query;
    int qlen = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < qlen; ++i) query.push_back("w" + std::string(1, static_cast<char>('a' + rng() % (vocab + 2))));
    int k = 1 + static_cast<int>(rng() % 12);

    auto want_scores = brute_bm25(raw, query, cfg.k1, cfg.b);
    auto got = bm25_search(idx, join(query, " "), k);
    ASSERT_EQ(ids_of(got), brute_rank(ids, want_scores, k, true)) << "trial " << trial;
    for (const auto& r : got) {
      auto pos = std::find(ids.begin(), ids.end(), r.entity_id) - ids.begin();
      EXPECT_NEAR(r.score, want_scores[pos], 1e-12);
    }
  }
}

TEST(Sparse, ParallelKernelsMatchSerial) {
  std::mt19937 rng(7);
  int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> texts;
    for (int d = 0; d < 300; ++d) {
      std::string t;
      for (int i = 0; i < 20; ++i) t += "t" + std::to_string(rng() % 200) + " ";
      texts.push_back(t);
    }
    auto entities = toy(texts);
    SparseIndex par = build_sparse_index(entities, {});
    SparseIndex ser = build_sparse_index_serial(entities, {});
    ASSERT_EQ(par.vocabulary, ser.vocabulary);
    ASSERT_EQ(par.doc_terms, ser.doc_terms);
    std::vector<std::string> q = {"t" + std::to_string(rng() % 200), "t" + std::to_string(rng() % 200), "t1"};
    EXPECT_EQ(bm25_scores(par, q), bm25_scores_serial(ser, q));
  }
  omp_set_num_threads(saved);
}

TEST(Sparse, PrefixAndMonotonicity) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::string>> raw(20);
    std::vector<std::string> texts;
    for (auto& d : raw) {
      for (int i = 0; i < 6; ++i) d.push_back(std::string(1, static_cast<char>('a' + rng() % 6)));
      texts.push_back(join(d, " "));
    }
    SparseIndex idx = build_sparse_index(toy(texts), {});
    auto full = bm25_search(idx, "a b", 10);
    for (int k = 1; k < 10; ++k) {
      auto part = bm25_search(idx, "a b", k);
      ASSERT_LE(part.size(), full.size());
      EXPECT_TRUE(std::equal(part.begin(), part.end(), full.begin()));
    }

    // Replace a non-query token by the query term in a document that already
    // contains it: df, lengths and the average stay fixed, tf grows by one.
    for (std::size_t d = 0; d < raw.size(); ++d) {
      auto it = std::find(raw[d].begin(), raw[d].end(), "a");
      auto other = std::find_if(raw[d].begin(), raw[d].end(), [](const std::string& t) { return t != "a"; });
      if (it == raw[d].end() || other == raw[d].end()) continue;
      auto before = brute_bm25(raw, {"a"}, 1.5, 0.75)[d];
      auto bumped = raw;
      bumped[d][other - raw[d].begin()] = "a";
      std::vector<std::string> bumped_texts;
      for (auto& x : bumped) bumped_texts.push_back(join(x, " "));
      auto after = bm25_scores(build_sparse_index(toy(bumped_texts), {}), {"a"})[d];
      EXPECT_GE(after, before);
      break;
    }
  }
}

TEST(Sparse, PersistRoundTripAndDeterministicRebuild) {
  fs::path dir = scratch_dir("sparse_persist");
  auto docs = toy({"push stack", "pop stack", "hash map", "hashMap lookup"});
  SparseIndex idx = build_sparse_index(docs, {});
  save_sparse_index(idx, dir / "a");
  save_sparse_index(build_sparse_index(docs, {}), dir / "b");
  EXPECT_EQ(read_file((dir / "a" / "index.json").string()), read_file((dir / "b" / "index.json").string()));
  SparseIndex back = load_sparse_index(dir / "a");
  EXPECT_EQ(back.entity_ids, idx.entity_ids);
  EXPECT_EQ(back.df, idx.df);
  EXPECT_EQ(back.postings, idx.postings);
  EXPECT_EQ(back.avg_length, idx.avg_length);
  EXPECT_EQ(bm25_search(back, "hash stack", 10), bm25_search(idx, "hash stack", 10));
  expect_error(ErrorCode::kMissingIndex, [&] { load_sparse_index(dir / "none"); });
}

TEST(Dense, IdentityAndOrthogonal) {
  DenseIndex idx = make_dense_index({"a", "b", "c"}, {{1, 2, 3}, {0, 0, 1}, {3, -1, 0}}, RetrieverConfig::parse("dense:m"));
  auto rs = dense_search(idx, {1, 2, 3}, 3);
  EXPECT_EQ(rs[0].entity_id, "a");
  EXPECT_NEAR(rs[0].score, 1.0, 1e-15);
  auto orth = cosine_scores(idx, {1, 3, 0});
  EXPECT_EQ(orth[1], 0.0);
  EXPECT_EQ(orth[2], 0.0);
}

TEST(Dense, ZeroNormHandling) {
  DenseIndex idx = make_dense_index({"a", "b", "c"}, {{0, 0}, {1, 0}, {0, 1}}, RetrieverConfig::parse("dense:m"));
  auto rs = dense_search(idx, {1, 1}, 3);
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[2].entity_id, "a");
  EXPECT_TRUE(std::isinf(rs[2].score) && rs[2].score < 0);
  EXPECT_EQ(ids_of(rs), (std::vector<std::string>{"b", "c", "a"}));
  expect_error(ErrorCode::kPrecondition, [&] { dense_search(idx, {0, 0}, 3); });
  expect_error(ErrorCode::kDimensionMismatch, [&] { dense_search(idx, {1, 0, 0}, 3); });
  expect_error(ErrorCode::kDimensionMismatch,
               [] { make_dense_index({"a", "b"}, {{1, 0}, {1}}, RetrieverConfig::parse("dense:m")); });
}

TEST(Dense, RandomVectorsMatchExhaustiveSort) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 200; ++trial) {
    int n = trial == 0 ? 5 : 1 + static_cast<int>(rng() % 100);
    int dim = 1 + static_cast<int>(rng() % 64);
    int k = trial == 0 ? 3 : 1 + static_cast<int>(rng() % 12);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vs;
    for (int i = 0; i < n; ++i) {
      ids.push_back("d" + std::to_string(rng() % 1000) + "_" + std::to_string(i));
      std::vector<double> v(dim);
      // Small integer coordinates make exact ties and duplicates likely.
      for (auto& x : v) x = trial % 2 ? gauss(rng) : static_cast<double>(static_cast<int>(rng() % 3) - 1);
      vs.push_back(v);
    }
    std::vector<double> q(dim);
    for (auto& x : q) x = gauss(rng);
    if (std::all_of(q.begin(), q.end(), [](double x) { return x == 0; })) q[0] = 1;
    DenseIndex idx = make_dense_index(ids, vs, RetrieverConfig::parse("dense:m"));

    auto want = brute_cosine(vs, q);
    auto got = dense_search(idx, q, k);
    ASSERT_EQ(ids_of(got), brute_rank(ids, want, k, false)) << "trial " << trial;
  }
}

TEST(Dense, ScaleInvarianceAndKernelAgreement) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vs, scaled;
  for (int i = 0; i < 500; ++i) {
    ids.push_back("d" + std::to_string(i));
    std::vector<double> v(32);
    for (auto& x : v) x = u(rng);
    vs.push_back(v);
    for (auto& x : v) x *= 4.0;  // power of two keeps the arithmetic exact
    scaled.push_back(v);
  }
  std::vector<double> q(32);
  for (auto& x : q) x = u(rng);
  DenseIndex a = make_dense_index(ids, vs, RetrieverConfig::parse("dense:m"));
  DenseIndex b = make_dense_index(ids, scaled, RetrieverConfig::parse("dense:m"));
  EXPECT_EQ(ids_of(dense_search(a, q, 10)), ids_of(dense_search(b, q, 10)));
  int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  EXPECT_EQ(cosine_scores(a, q), cosine_scores_serial(a, q));
  omp_set_num_threads(saved);
}

TEST(Dense, PersistRoundTrip) {
  fs::path dir = scratch_dir("dense_persist");
  DenseIndex idx = make_dense_index({"a", "b"}, {{0.1, 0.2}, {1e-300, -3.5}}, RetrieverConfig::parse("dense:m"));
  idx.corpus_hash = "h";
  save_dense_index(idx, dir);
  DenseIndex back = load_dense_index(dir);
  EXPECT_EQ(back.vectors, idx.vectors);
  EXPECT_EQ(back.entity_ids, idx.entity_ids);
  EXPECT_EQ(back.corpus_hash, "h");
}

TEST(Embed, CacheHitMakesNoRequest) {
  ScriptedProvider p(8);
  EmbeddingCache cache;
  Embedder e(p, cache, no_sleep());
  auto first = e.embed({"alpha", "beta", "alpha"});
  EXPECT_EQ(p.calls, 1);
  EXPECT_EQ(p.seen, (std::vector<std::string>{"alpha", "beta"}));
  EXPECT_EQ(first[0], first[2]);
  auto second = e.embed({"beta", "alpha"});
  EXPECT_EQ(p.calls, 1);
  EXPECT_EQ(second[0], first[1]);
}

TEST(Embed, StoredVectorsEqualProviderOutput) {
  ScriptedProvider p(4);
  EmbeddingCache cache;
  Embedder e(p, cache, no_sleep(), 2);
  std::vector<std::string> texts = {"a", "b", "c", "d", "e"};
  auto got = e.embed(texts);
  EXPECT_EQ(p.calls, 3);  // batches of two
  ScriptedProvider fresh(4);
  EXPECT_EQ(got, fresh.embed_batch(texts));
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(*cache.lookup("scripted", texts[i]), got[i]);
}

TEST(Embed, EmptyListIsPreconditionError) {
  ScriptedProvider p(4);
  EmbeddingCache cache;
  Embedder e(p, cache, no_sleep());
  expect_error(ErrorCode::kPrecondition, [&] { e.embed({}); });
}

TEST(Embed, RetriesWithBackoffThenSucceeds) {
  ScriptedProvider p(4);
  p.failures_left = 2;
  EmbeddingCache cache;
  std::vector<long> delays;
  Embedder e(p, cache, no_sleep(&delays));
  e.embed({"x"});
  EXPECT_EQ(p.calls, 3);
  EXPECT_EQ(delays, (std::vector<long>{250, 500}));
}

TEST(Embed, GivesUpAfterThreeAttempts) {
  ScriptedProvider p(4);
  p.failures_left = 10;
  EmbeddingCache cache;
  Embedder e(p, cache, no_sleep());
  expect_error(ErrorCode::kProvider, [&] { e.embed({"x"}); });
  EXPECT_EQ(p.calls, 3);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(Embed, DimensionMismatchIsHardError) {
  ScriptedProvider p(4);
  p.wrong_dim = true;
  EmbeddingCache cache;
  Embedder e(p, cache, no_sleep());
  expect_error(ErrorCode::kDimensionMismatch, [&] { e.embed({"x"}); });
  EXPECT_EQ(p.calls, 1);
}

TEST(Embed, CacheFileSurvivesReload) {
  fs::path dir = scratch_dir("cache_file");
  ScriptedProvider p(4);
  {
    EmbeddingCache cache(dir / "cache.jsonl");
    Embedder e(p, cache, no_sleep());
    e.embed({"one", "two"});
  }
  EmbeddingCache reloaded(dir / "cache.jsonl");
  Embedder e(p, reloaded, no_sleep());
  e.embed({"two", "one"});
  EXPECT_EQ(p.calls, 1);
  EXPECT_EQ(reloaded.size(), 2u);
}

TEST(Embed, HashingProviderIsDeterministic) {
  HashingProvider h(16);
  EXPECT_EQ(h.model_id(), "hashing-16");
  auto a = h.embed_batch({"push onto the stack", "pushOnto theStack", ""});
  EXPECT_EQ(a[0], a[1]);
  EXPECT_EQ(a[0].size(), 16u);
  EXPECT_TRUE(std::all_of(a[2].begin(), a[2].end(), [](double x) { return x == 0; }));
  EXPECT_EQ(make_embedding_provider("hashing-16")->embed_batch({"push onto the stack"})[0], a[0]);
  expect_error(ErrorCode::kConfig, [] { make_embedding_provider("hashing-x"); });
}

TEST(Embed, HttpProviderAgainstLocalService) {
  httplib::Server server;
  int requests = 0;
  server.Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
    if (++requests == 1) {
      res.status = 503;
      return;
    }
    Json body = Json::parse(req.body);
    EXPECT_EQ(body["model"], "basis");
    Json vectors = Json::array();
    for (std::size_t i = 0; i < body["texts"].size(); ++i) {
      std::vector<double> v(3, 0.0);
      v[i % 3] = 1.0;
      vectors.push_back(v);
    }
    res.set_content(Json{{"vectors", vectors}}.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("EMBED_URL", ("http://127.0.0.1:" + std::to_string(port) + "/v1").c_str(), 1);
  ::setenv("EMBED_DIM", "3", 1);
  auto provider = make_embedding_provider("basis");
  EmbeddingCache cache;
  Embedder e(*provider, cache, no_sleep());
  auto vs = e.embed({"p", "q", "r", "s"});
  EXPECT_EQ(requests, 2);
  EXPECT_EQ(vs[0], (Vector{1, 0, 0}));
  EXPECT_EQ(vs[3], (Vector{1, 0, 0}));

  ::setenv("EMBED_DIM", "5", 1);
  auto wrong = make_embedding_provider("basis");
  Embedder e2(*wrong, cache, no_sleep());
  expect_error(ErrorCode::kDimensionMismatch, [&] { e2.embed({"new text"}); });

  server.stop();
  t.join();
  ::unsetenv("EMBED_URL");
  ::unsetenv("EMBED_DIM");
  expect_error(ErrorCode::kConfig, [] { make_embedding_provider("basis"); });
}

TEST(Store, BuildOpenAndSearch) {
  fs::path data = scratch_dir("store");
  auto docs = toy({"push stack", "pop stack", "hash map"});
  RetrieverConfig bm25;
  expect_error(ErrorCode::kMissingIndex, [&] { open_searcher(data, "toy", bm25, nullptr); });
  IndexMeta meta = build_index(data, "toy", docs, bm25, nullptr);
  EXPECT_EQ(meta.documents, 3u);
  EXPECT_TRUE(fs::exists(data / "index" / "toy" / "bm25" / "index.json"));
  auto s = open_searcher(data, "toy", bm25, nullptr);
  EXPECT_EQ(s->search("stack", 10), bm25_search(build_sparse_index(docs, bm25), "stack", 10));
  EXPECT_EQ(s->meta().corpus_hash, corpus_hash(docs));

  HashingProvider hp(32);
  EmbeddingCache cache;
  Embedder embedder(hp, cache, no_sleep());
  RetrieverConfig dense = RetrieverConfig::parse("dense:hashing-32");
  build_index(data, "toy", docs, dense, &embedder);
  auto d = open_searcher(data, "toy", dense, &embedder);
  auto rs = d->search("hash map", 3);
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[0].entity_id, "e003");
  EXPECT_NEAR(rs[0].score, 1.0, 1e-12);

  RetrieverConfig other = RetrieverConfig::parse("dense:hashing-16");
  expect_error(ErrorCode::kConfig, [&] { build_index(data, "toy", docs, other, &embedder); });
  expect_error(ErrorCode::kConfig, [&] { open_searcher(data, "toy", dense, nullptr); });
}
