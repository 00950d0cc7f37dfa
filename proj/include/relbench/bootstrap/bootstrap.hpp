#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relbench/judge/judge.hpp"
#include "relbench/metrics/metrics.hpp"
#include "relbench/transpile/dataset.hpp"

namespace relbench::bootstrap {

struct BootstrapRun {
  std::string dataset_id;
  std::string model_id;
  metrics::CrossTab counts;  // rows: original label, columns: judge verdict
  std::size_t records = 0;
  std::size_t transpiled = 0;
  std::size_t skipped = 0;       // transpilation failures
  std::size_t judge_errors = 0;  // transpiled but without a verdict
  std::size_t pending = 0;       // batch mode: still waiting for a response

  Json to_json() const;
};

struct BootstrapOptions {
  transpile::TypeMapping types;
  bool batch = false;  // use the file-based batch pathway under out/batch
};

// Transpiles the dataset, judges each translated record (query + C code
// only) and cross-tabulates the verdicts against the original labels.
// `out` receives crosstab.json, crosstab.txt, skipped.jsonl, verdicts.jsonl
// and the run's annotation database; judged records are skipped when the
// same directory is used again. `provider` may be null in batch mode.
BootstrapRun run_bootstrap(const std::vector<transpile::QaRecord>& records, const std::string& dataset_id,
                           const judge::JudgeConfig& config, judge::JudgeProvider* provider,
                           const std::filesystem::path& out, const BootstrapOptions& options = {});

}  // namespace relbench::bootstrap
