#include "relbench/bootstrap/bootstrap.hpp"

#include <map>
#include <set>

#include "relbench/annotate/store.hpp"
#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"

namespace relbench::bootstrap {

namespace fs = std::filesystem;

Json BootstrapRun::to_json() const {
  return {{"dataset_id", dataset_id},   {"model_id", model_id},     {"crosstab", counts.to_json()},
          {"records", records},         {"transpiled", transpiled}, {"skipped", skipped},
          {"judge_errors", judge_errors}, {"pending", pending}};
}

BootstrapRun run_bootstrap(const std::vector<transpile::QaRecord>& records, const std::string& dataset_id,
                           const judge::JudgeConfig& config, judge::JudgeProvider* provider, const fs::path& out,
                           const BootstrapOptions& options) {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw Error(ErrorCode::kPrecondition, "duplicate record id " + r.id);
    if (r.label != 0 && r.label != 1) throw Error(ErrorCode::kPrecondition, "record " + r.id + " has a non-binary label");
  }
  fs::create_directories(out);

  auto dataset = transpile::transpile_dataset(records, options.types);
  std::vector<Json> skipped;
  for (const auto& f : dataset.failures) {
    skipped.push_back({{"id", f.id},
                       {"category", transpile::category_name(f.failure.category)},
                       {"node_kind", f.failure.node_kind},
                       {"detail", f.failure.detail}});
  }
  write_file_atomic((out / "skipped.jsonl").string(), to_jsonl(skipped));

  // Each record is its own query with a one-item frozen result list, so the
  // annotation store provides idempotent, resumable judging.
  annotate::AnnotationStore store(out / "bootstrap.db");
  std::vector<judge::JudgePair> pairs;
  pairs.reserve(dataset.transpiled.size());
  for (const auto& t : dataset.transpiled) {
    auto q = store.register_query(t.query, dataset_id, "transpiled-c:" + t.id);
    store.snapshot_results(q, {{t.id, 1, 0.0}});
    corpus::CodeEntity e;
    e.entity_id = t.id;
    e.repo = dataset_id;
    e.function_name = t.id;
    e.code = t.c_code;
    pairs.push_back({q, std::move(e)});
  }

  judge::JudgeRunner runner(config, provider, store, out / "verdicts.jsonl");
  BootstrapRun run;
  run.dataset_id = dataset_id;
  run.model_id = config.model_id;
  run.records = records.size();
  run.transpiled = dataset.transpiled.size();
  run.skipped = dataset.failures.size();
  if (!pairs.empty()) {
    if (options.batch) {
      run.pending = runner.judge_batch(pairs, out / "batch").pending.size();
    } else {
      runner.run(pairs);
    }
  }

  std::map<std::string, int> verdict;
  for (const auto& l : store.export_annotator(config.model_id)) verdict[l.entity_id] = l.label;
  std::vector<int> original, judged;
  for (const auto& t : dataset.transpiled) {
    auto it = verdict.find(t.id);
    if (it == verdict.end()) continue;
    original.push_back(t.label);
    judged.push_back(it->second);
  }
  run.counts = metrics::cross_tab(original, judged);
  run.judge_errors = run.transpiled - original.size() - run.pending;

  write_file_atomic((out / "crosstab.json").string(), run.to_json().dump(2) + "\n");
  std::string table = run.counts.total() > 0 ? metrics::render_crosstab(run.counts, config.model_id)
                                             : "no judged records\n";
  table += "records " + std::to_string(run.records) + ", transpiled " + std::to_string(run.transpiled) +
           ", skipped " + std::to_string(run.skipped) + ", judge errors " + std::to_string(run.judge_errors) +
           ", pending " + std::to_string(run.pending) + "\n";
  write_file_atomic((out / "crosstab.txt").string(), table);
  return run;
}

}  // namespace relbench::bootstrap
