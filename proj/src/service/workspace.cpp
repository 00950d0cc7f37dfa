#include "relbench/service/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"

namespace relbench::service {

namespace fs = std::filesystem;

namespace {

std::string path_safe(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
  return out;
}

void check_repo_name(const std::string& name) {
  if (name.empty() || name != path_safe(name) || name == "." || name == "..") {
    throw Error(ErrorCode::kConfig, "repository names may only use letters, digits, '.', '-' and '_': " + name);
  }
}

corpus::RepoSpec repo_from_json(const Json& j, const fs::path& base) {
  corpus::RepoSpec spec;
  spec.name = j.at("name").get<std::string>();
  fs::path root = j.at("root").get<std::string>();
  spec.root_path = root.is_absolute() ? root : base / root;
  auto lang = corpus::parse_language(j.at("language").get<std::string>());
  if (!lang) throw Error(ErrorCode::kConfig, "unknown language for repository " + spec.name);
  spec.language = *lang;
  spec.extensions = j.value("extensions", std::vector<std::string>{});
  spec.commit = j.value("commit", "");
  spec.ignore = j.value("ignore", std::vector<std::string>{});
  return spec;
}

judge::JudgeConfig judge_from_json(const Json& j) {
  judge::JudgeConfig c;
  c.model_id = j.at("model_id").get<std::string>();
  std::string provider = j.value("provider", "openai_compat");
  if (provider == "openai_compat") c.provider = judge::ProviderKind::kOpenAiCompat;
  else if (provider == "batch_file") c.provider = judge::ProviderKind::kBatchFile;
  else throw Error(ErrorCode::kConfig, "unknown judge provider " + provider);
  if (j.contains("prompt_template")) c.prompt_template = j["prompt_template"].get<std::string>();
  c.max_retries = j.value("max_retries", c.max_retries);
  c.temperature = j.value("temperature", c.temperature);
  c.seed = j.value("seed", c.seed);
  c.concurrency = j.value("concurrency", c.concurrency);
  c.passage_budget = j.value("passage_budget", c.passage_budget);
  c.validate();
  return c;
}

}  // namespace

AppConfig AppConfig::load(const fs::path& data_dir) {
  AppConfig c;
  c.data_dir = data_dir;
  c.queries_file = data_dir / "queries.txt";
  fs::path file = data_dir / "relbench.json";
  if (fs::exists(file)) {
    Json j = Json::parse(read_file(file.string()), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kParse, file.string() + ": not a JSON object");
    try {
      for (const auto& r : j.value("repos", Json::array())) c.repos.push_back(repo_from_json(r, data_dir));
      for (const auto& r : j.value("retrievers", Json::array())) {
        c.retrievers.push_back(r.is_string() ? index::RetrieverConfig::parse(r.get<std::string>())
                                             : index::RetrieverConfig::from_json(r));
      }
      for (const auto& r : j.value("judges", Json::array())) c.judges.push_back(judge_from_json(r));
      if (j.contains("queries_file")) {
        fs::path q = j["queries_file"].get<std::string>();
        c.queries_file = q.is_absolute() ? q : data_dir / q;
      }
      c.listen_addr = j.value("listen", c.listen_addr);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kConfig, file.string() + ": " + e.what());
    }
  }
  if (c.retrievers.empty()) c.retrievers.push_back(index::RetrieverConfig{});
  return c;
}

void AppConfig::validate() const {
  std::set<std::string> names;
  for (const auto& r : retrievers) {
    r.validate();
    if (!names.insert(r.name()).second) throw Error(ErrorCode::kConfig, "duplicate retriever name " + r.name());
  }
  std::set<std::string> repo_names;
  for (const auto& r : repos) {
    check_repo_name(r.name);
    r.validate();
    if (!repo_names.insert(r.name).second) throw Error(ErrorCode::kConfig, "duplicate repository " + r.name);
    if (!fs::is_directory(r.root_path)) throw Error(ErrorCode::kPath, "repository root not found: " + r.root_path.string());
  }
  if (fs::exists(data_dir / "relbench.json") && !queries_file.empty() && queries_file != data_dir / "queries.txt" &&
      !fs::exists(queries_file)) {
    throw Error(ErrorCode::kPath, "queries file not found: " + queries_file.string());
  }
}

Json SearchOutcome::to_json() const {
  Json results = Json::array();
  for (const auto& h : hits) {
    results.push_back({{"entity_id", h.result.entity_id},
                       {"rank", h.result.rank},
                       {"score", h.result.score},
                       {"rel_path", h.entity.rel_path},
                       {"function_name", h.entity.function_name},
                       {"code", h.entity.code},
                       {"docstring", h.entity.docstring}});
  }
  return {{"query_id", query.query_id}, {"query", query.text}, {"repo", query.repo},
          {"retriever", query.retriever}, {"results", results}};
}

Workspace::Workspace(AppConfig config) : config_(std::move(config)) {
  config_.validate();
  fs::create_directories(config_.data_dir);
  store_ = std::make_unique<annotate::AnnotationStore>(config_.data_dir / "annotations.db");
  embed_cache_ = std::make_unique<index::EmbeddingCache>(config_.data_dir / "embeddings.jsonl");
}

fs::path Workspace::corpus_path(const std::string& repo) const { return config_.data_dir / "corpus" / (repo + ".jsonl"); }

IngestSummary Workspace::ingest(const corpus::RepoSpec& spec) {
  check_repo_name(spec.name);
  spec.validate();
  corpus::IngestResult result = corpus::ingest_repo(spec);
  corpus::write_corpus(result.entities, corpus_path(spec.name));
  IngestSummary s;
  s.repo = spec.name;
  s.files = result.files_scanned;
  s.functions = result.entities.size();
  s.stats = corpus::compute_stats(result.entities);
  s.warnings = std::move(result.warnings);
  std::lock_guard lock(mu_);
  corpora_.erase(spec.name);
  for (auto it = searchers_.begin(); it != searchers_.end();) {
    it = it->first.rfind(spec.name + "\n", 0) == 0 ? searchers_.erase(it) : std::next(it);
  }
  return s;
}

std::vector<std::string> Workspace::repos() const {
  std::vector<std::string> out;
  fs::path dir = config_.data_dir / "corpus";
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::shared_ptr<const std::vector<corpus::CodeEntity>> Workspace::corpus(const std::string& repo) {
  check_repo_name(repo);
  std::lock_guard lock(mu_);
  auto it = corpora_.find(repo);
  if (it != corpora_.end()) return it->second;
  fs::path p = corpus_path(repo);
  if (!fs::exists(p)) throw Error(ErrorCode::kPath, "unknown repository " + repo + " (run: relbench ingest --repo " + repo + ")");
  auto entities = std::make_shared<const std::vector<corpus::CodeEntity>>(corpus::read_corpus(p));
  corpora_[repo] = entities;
  return entities;
}

index::RetrieverConfig Workspace::resolve_retriever(const std::string& spec) const {
  for (const auto& r : config_.retrievers) {
    if (r.name() == spec) return r;
  }
  index::RetrieverConfig parsed = index::RetrieverConfig::parse(spec);
  // Prefer the configured parameters for the same kind and model.
  for (const auto& r : config_.retrievers) {
    if (r.kind == parsed.kind && r.model_id == parsed.model_id) return r;
  }
  return parsed;
}

index::Embedder* Workspace::embedder_for(const index::RetrieverConfig& config) {
  if (config.kind != index::RetrieverKind::kDense) return nullptr;
  std::lock_guard lock(mu_);
  auto it = embedders_.find(config.model_id);
  if (it != embedders_.end()) return it->second.get();
  auto provider = index::make_embedding_provider(config.model_id);
  auto embedder = std::make_unique<index::Embedder>(*provider, *embed_cache_);
  embed_providers_[config.model_id] = std::move(provider);
  return (embedders_[config.model_id] = std::move(embedder)).get();
}

IndexOutcome Workspace::build_index(const std::string& repo, const index::RetrieverConfig& config, bool force) {
  auto entities = corpus(repo);
  std::string hash = index::corpus_hash(*entities);
  if (!force) {
    try {
      index::IndexMeta meta = index::read_index_meta(config_.data_dir, repo, config);
      if (meta.corpus_hash == hash && meta.config.fingerprint() == config.fingerprint()) return {meta, false};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingIndex) throw;
    }
  }
  IndexOutcome out{index::build_index(config_.data_dir, repo, *entities, config, embedder_for(config)), true};
  std::lock_guard lock(mu_);
  searchers_.erase(repo + "\n" + config.fingerprint());
  return out;
}

SearchOutcome Workspace::search(const std::string& text, const std::string& repo, const index::RetrieverConfig& config) {
  auto entities = corpus(repo);
  std::unordered_map<std::string, const corpus::CodeEntity*> by_id;
  for (const auto& e : *entities) by_id.emplace(e.entity_id, &e);

  SearchOutcome out;
  std::string fingerprint = config.fingerprint();
  std::string qid = annotate::make_query_id(annotate::normalize_query(text), repo, fingerprint);
  std::vector<index::RankedResult> results;
  if (store_->has_snapshot(qid)) {
    out.query = *store_->find_query(qid);
    results = store_->snapshot(qid);
  } else {
    std::shared_ptr<index::Searcher> searcher;
    {
      std::string key = repo + "\n" + fingerprint;
      index::Embedder* embedder = embedder_for(config);
      std::lock_guard lock(mu_);
      auto it = searchers_.find(key);
      if (it == searchers_.end()) {
        try {
          it = searchers_.emplace(key, index::open_searcher(config_.data_dir, repo, config, embedder)).first;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMissingIndex) throw;
          throw Error(ErrorCode::kMissingIndex, "no " + config.name() + " index for " + repo +
                                                    " (run: relbench index --repo " + repo + " --retriever " +
                                                    (config.kind == index::RetrieverKind::kDense
                                                         ? "dense:" + config.model_id
                                                         : std::string("bm25")) +
                                                    ")");
        }
      }
      searcher = it->second;
    }
    if (searcher->meta().corpus_hash != index::corpus_hash(*entities)) {
      throw Error(ErrorCode::kMissingIndex, "the " + config.name() + " index for " + repo +
                                                " is older than its corpus (run: relbench index --repo " + repo + ")");
    }
    results = searcher->search(text, config.cutoff);
    out.query = store_->register_query(text, repo, fingerprint);
    store_->snapshot_results(out.query, results);
  }
  for (const auto& r : results) {
    auto it = by_id.find(r.entity_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kConflict, "snapshot entity " + r.entity_id + " is no longer in the " + repo + " corpus");
    }
    out.hits.push_back({r, *it->second});
  }
  return out;
}

annotate::LabelRecord Workspace::annotate(const std::string& query_id, const std::string& entity_id, int label,
                                          const std::string& annotator_id) {
  if (label != 0 && label != 1) throw Error(ErrorCode::kPrecondition, "label must be 0 or 1");
  if (annotator_id.empty()) throw Error(ErrorCode::kPrecondition, "annotator_id is required");
  if (!store_->find_query(query_id)) throw Error(ErrorCode::kReferential, "unknown query " + query_id);
  return store_->record_label(annotator_id, query_id, entity_id, label, annotate::LabelSource::kHuman);
}

std::vector<annotate::LabelRecord> Workspace::labels(const std::string& query_id) const {
  std::vector<annotate::LabelRecord> out;
  for (auto& r : store_->effective_labels()) {
    if (r.query_id == query_id) out.push_back(std::move(r));
  }
  return out;
}

std::vector<judge::JudgePair> Workspace::judge_pairs(const std::string& repo, const index::RetrieverConfig& config) {
  auto entities = corpus(repo);
  std::unordered_map<std::string, const corpus::CodeEntity*> by_id;
  for (const auto& e : *entities) by_id.emplace(e.entity_id, &e);
  std::vector<judge::JudgePair> pairs;
  for (const auto& q : store_->queries(repo, config.fingerprint())) {
    if (!store_->has_snapshot(q.query_id)) continue;
    for (const auto& r : store_->snapshot(q.query_id)) {
      auto it = by_id.find(r.entity_id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kConflict, "snapshot entity " + r.entity_id + " is no longer in the " + repo + " corpus");
      }
      pairs.push_back({q, *it->second});
    }
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kPrecondition, "no searched queries to judge for " + repo + " / " + config.name());
  }
  return pairs;
}

judge::JudgeReport Workspace::run_judge(const std::string& repo, const index::RetrieverConfig& config,
                                        const judge::JudgeConfig& judge_config, judge::JudgeProvider& provider) {
  auto pairs = judge_pairs(repo, config);
  fs::path log = config_.data_dir / "judge" / path_safe(judge_config.model_id) / "verdicts.jsonl";
  fs::create_directories(log.parent_path());
  judge::JudgeRunner runner(judge_config, &provider, *store_, log);
  return runner.run(pairs);
}

judge::BatchStatus Workspace::run_judge_batch(const std::string& repo, const index::RetrieverConfig& config,
                                              const judge::JudgeConfig& judge_config) {
  auto pairs = judge_pairs(repo, config);
  fs::path dir = config_.data_dir / "judge" / path_safe(judge_config.model_id);
  fs::create_directories(dir);
  judge::JudgeRunner runner(judge_config, nullptr, *store_, dir / "verdicts.jsonl");
  return runner.judge_batch(pairs, dir / "batch" / repo / config.name());
}

metrics::AgreementReport Workspace::report(const std::string& repo, const index::RetrieverConfig& config,
                                           const std::string& judge_model, const std::string& human) {
  corpus(repo);
  std::string a = human;
  if (a.empty()) {
    std::vector<std::string> humans;
    for (const auto& [id, source] : store_->annotators()) {
      if (source == annotate::LabelSource::kHuman) humans.push_back(id);
    }
    if (humans.empty()) throw Error(ErrorCode::kNoAnnotations, "no annotations: no human labels recorded");
    if (humans.size() > 1) {
      throw Error(ErrorCode::kConfig, "several human annotators (" + join(humans, ", ") + "); choose one with --annotator");
    }
    a = humans.front();
  }
  return metrics::agreement_report(*store_, repo, config.fingerprint(), a, judge_model);
}

std::vector<std::string> Workspace::predefined_queries() const {
  std::vector<std::string> out;
  if (!fs::exists(config_.queries_file)) return out;
  std::ifstream in(config_.queries_file);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

}  // namespace relbench::service
