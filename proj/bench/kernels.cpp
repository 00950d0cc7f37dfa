// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "relbench/common/text.hpp"
#include "relbench/corpus/corpus.hpp"
#include "relbench/index/dense.hpp"
#include "relbench/index/sparse.hpp"
#include "relbench/transpile/dataset.hpp"

namespace fs = std::filesystem;
using namespace relbench;

namespace {

std::vector<corpus::CodeEntity> synthetic_corpus(int n) {
  std::mt19937 rng(7);
  std::vector<corpus::CodeEntity> out;
  for (int i = 0; i < n; ++i) {
    corpus::CodeEntity e;
    e.entity_id = "e" + std::to_string(i);
    e.repo = "bench";
    e.rel_path = "f" + std::to_string(i % 97) + ".py";
    e.function_name = "fn" + std::to_string(i);
    std::string body = "def fn" + std::to_string(i) + "(values):\n";
    for (int line = 0; line < 8; ++line) {
      body += "    total_" + std::to_string(rng() % 400) + " = parseValue" + std::to_string(rng() % 300) + "(values)\n";
    }
    e.code = body;
    e.start_line = 1;
    e.end_line = 9;
    out.push_back(std::move(e));
  }
  return out;
}

const index::SparseIndex& sparse_fixture() {
  static const index::SparseIndex idx = index::build_sparse_index(synthetic_corpus(20000), index::RetrieverConfig{});
  return idx;
}

const std::vector<std::string> kQuery = {"parse", "value17", "total", "values", "fn"};

void BM_Bm25ScoresSerial(benchmark::State& state) {
  const auto& idx = sparse_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(index::bm25_scores_serial(idx, kQuery));
}
void BM_Bm25ScoresParallel(benchmark::State& state) {
  const auto& idx = sparse_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(index::bm25_scores(idx, kQuery));
}

void BM_SparseBuildSerial(benchmark::State& state) {
  auto corpus = synthetic_corpus(5000);
  for (auto _ : state) benchmark::DoNotOptimize(index::build_sparse_index_serial(corpus, index::RetrieverConfig{}));
}
void BM_SparseBuildParallel(benchmark::State& state) {
  auto corpus = synthetic_corpus(5000);
  for (auto _ : state) benchmark::DoNotOptimize(index::build_sparse_index(corpus, index::RetrieverConfig{}));
}

const index::DenseIndex& dense_fixture() {
  static const index::DenseIndex idx = [] {
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vs;
    for (int i = 0; i < 50000; ++i) {
      ids.push_back("v" + std::to_string(i));
      std::vector<double> v(256);
      for (auto& x : v) x = gauss(rng);
      vs.push_back(std::move(v));
    }
    return index::make_dense_index(ids, vs, index::RetrieverConfig::parse("dense:bench"));
  }();
  return idx;
}

std::vector<double> dense_query() {
  std::mt19937 rng(13);
  std::normal_distribution<double> gauss;
  std::vector<double> q(256);
  for (auto& x : q) x = gauss(rng);
  return q;
}

void BM_CosineSerial(benchmark::State& state) {
  const auto& idx = dense_fixture();
  auto q = dense_query();
  for (auto _ : state) benchmark::DoNotOptimize(index::cosine_scores_serial(idx, q));
}
void BM_CosineParallel(benchmark::State& state) {
  const auto& idx = dense_fixture();
  auto q = dense_query();
  for (auto _ : state) benchmark::DoNotOptimize(index::cosine_scores(idx, q));
}

std::vector<transpile::QaRecord> qa_records() {
  const char* sources[] = {
      "def add(a, b):\n    return a + b\n",
      "def total(xs):\n    s = 0\n    for i in range(len(xs)):\n        s += xs[i]\n    return s\n",
      "def clamp(x: int, lo: int, hi: int) -> int:\n    if x < lo:\n        return lo\n    if x > hi:\n        return hi\n    return x\n",
      "def squares(xs):\n    return [x * x for x in xs]\n",
      "def first(d):\n    return d['key']\n",
  };
  std::vector<transpile::QaRecord> out;
  for (int i = 0; i < 20000; ++i) out.push_back({std::to_string(i), "q", sources[i % 5], i % 2});
  return out;
}

void BM_TranspileDatasetSerial(benchmark::State& state) {
  auto records = qa_records();
  for (auto _ : state) benchmark::DoNotOptimize(transpile::transpile_dataset_serial(records, transpile::TypeMapping{}));
}
void BM_TranspileDatasetParallel(benchmark::State& state) {
  auto records = qa_records();
  for (auto _ : state) benchmark::DoNotOptimize(transpile::transpile_dataset(records, transpile::TypeMapping{}));
}

// A generated Python repository: 200 files of 25 functions each.
const corpus::RepoSpec& repo_fixture() {
  static const corpus::RepoSpec spec = [] {
    fs::path root = fs::temp_directory_path() / "relbench_bench_repo";
    fs::remove_all(root);
    for (int f = 0; f < 200; ++f) {
      std::string text;
      for (int i = 0; i < 25; ++i) {
        text += "def fn_" + std::to_string(i) + "(x):\n    \"\"\"Doc " + std::to_string(i) + ".\"\"\"\n";
        text += "    y = x * " + std::to_string(i) + "\n    return y\n\n";
      }
      fs::path file = root / ("pkg" + std::to_string(f % 10)) / ("m" + std::to_string(f) + ".py");
      fs::create_directories(file.parent_path());
      write_file_atomic(file.string(), text);
    }
    corpus::RepoSpec s;
    s.name = "bench";
    s.root_path = root;
    s.language = corpus::Language::kPython;
    return s;
  }();
  return spec;
}

void BM_IngestSerial(benchmark::State& state) {
  const auto& spec = repo_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(corpus::ingest_repo_serial(spec));
}
void BM_IngestParallel(benchmark::State& state) {
  const auto& spec = repo_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(corpus::ingest_repo(spec));
}

}  // namespace

BENCHMARK(BM_Bm25ScoresSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Bm25ScoresParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SparseBuildSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SparseBuildParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CosineSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CosineParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TranspileDatasetSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TranspileDatasetParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IngestSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IngestParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
