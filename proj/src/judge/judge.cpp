#include "relbench/judge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>
#include <unordered_set>

#include "relbench/common/text.hpp"
#include "relbench/common/tokenize.hpp"
#include "relbench/index/retriever.hpp"
#include "relbench/net/http.hpp"

namespace relbench::judge {

const char* const kDefaultPromptTemplate =
    "Given a query and a passage, you must provide a score on an integer scale of 0 to 3 with the following "
    "meanings:\n"
    "0 = represents that the passage has nothing to do with the query,\n"
    "1 = represents that the passage seems related to the query but does not answer it,\n"
    "2 = represents that the passage has some answer for the query, but the answer may be a bit unclear, or "
    "hidden amongst extraneous information and\n"
    "3 = represents that the passage is dedicated to the query and contains the exact answer.\n"
    "\n"
    "Important Instruction: Assign category 1 if the passage is somewhat related to the topic but not "
    "completely, category 2 if passage presents something very important related to the entire topic but also "
    "has some extra information and category 3 if the passage only and entirely refers to the topic. If none of "
    "the above satisfies give it category 0.\n"
    "\n"
    "Query: {query}\n"
    "Passage: {passage}\n"
    "\n"
    "Split this problem into steps:\n"
    "Consider the underlying intent of the search.\n"
    "Measure how well the content matches a likely intent of the query (M).\n"
    "Measure how trustworthy the passage is (T).\n"
    "Consider the aspects above and the relative importance of each, and decide on a final score (O). Final "
    "score must be an integer value only.\n"
    "Do not provide any code in result. Respond with a JSON object of the form {\"relevance\": <score>} and "
    "nothing else.\n";

namespace {

std::size_t count_occurrences(const std::string& haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

// Largest prefix of at most `budget` bytes that ends on a code point boundary.
std::size_t utf8_cut(const std::string& s, std::size_t budget) {
  if (s.size() <= budget) return s.size();
  std::size_t cut = budget;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return cut;
}

std::string replace_once(std::string text, std::string_view key, const std::string& value) {
  auto pos = text.find(key);
  return text.replace(pos, key.size(), value);
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

void JudgeConfig::validate() const {
  if (model_id.empty()) throw Error(ErrorCode::kConfig, "judge model id is empty");
  for (std::string_view key : {"{query}", "{passage}"}) {
    std::size_t n = count_occurrences(prompt_template, key);
    if (n != 1) {
      throw Error(ErrorCode::kConfig, "prompt template must contain " + std::string(key) + " exactly once, found " +
                                          std::to_string(n));
    }
  }
  if (max_retries < 1) throw Error(ErrorCode::kConfig, "max_retries must be at least 1");
  if (concurrency < 1) throw Error(ErrorCode::kConfig, "concurrency must be at least 1");
  if (passage_budget == 0) throw Error(ErrorCode::kConfig, "passage budget must be positive");
}

RenderedPrompt render_prompt(const JudgeConfig& config, std::string_view query, const corpus::CodeEntity& entity) {
  RenderedPrompt out;
  out.passage = index::document_text(entity);
  if (out.passage.size() > config.passage_budget) {
    out.passage.resize(utf8_cut(out.passage, config.passage_budget));
    out.truncated = true;
  }
  // Substitute the passage last so braces inside code are never re-expanded.
  auto qpos = config.prompt_template.find("{query}");
  auto ppos = config.prompt_template.find("{passage}");
  std::string text = config.prompt_template;
  if (qpos > ppos) {
    text = replace_once(std::move(text), "{query}", std::string(query));
    text = replace_once(std::move(text), "{passage}", out.passage);
  } else {
    text = replace_once(std::move(text), "{passage}", out.passage);
    text = replace_once(std::move(text), "{query}", std::string(query));
  }
  out.text = std::move(text);
  return out;
}

int collapse_grade(int grade) {
  if (grade < 0 || grade > 3) throw Error(ErrorCode::kPrecondition, "relevance grade out of range: " + std::to_string(grade));
  return grade == 0 ? 0 : 1;
}

std::optional<int> parse_relevance(std::string_view response) {
  Json j = Json::parse(response.begin(), response.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto it = j.find("relevance");
  if (it == j.end() || !it->is_number_integer()) return std::nullopt;
  auto v = it->get<std::int64_t>();
  if (v < 0 || v > 3) return std::nullopt;
  return static_cast<int>(v);
}

OpenAiCompatProvider::OpenAiCompatProvider(std::string url, std::string api_key, const JudgeConfig& config)
    : url_(std::move(url)),
      api_key_(std::move(api_key)),
      model_(config.model_id),
      temperature_(config.temperature),
      seed_(config.seed) {}

std::unique_ptr<OpenAiCompatProvider> OpenAiCompatProvider::from_env(const JudgeConfig& config) {
  std::string url = env_or_empty("JUDGE_URL");
  if (url.empty()) throw Error(ErrorCode::kConfig, "JUDGE_URL is required for the openai_compat judge provider");
  return std::make_unique<OpenAiCompatProvider>(url, env_or_empty("JUDGE_API_KEY"), config);
}

Json OpenAiCompatProvider::request_body(const JudgeRequest& request) const {
  Json schema = {{"type", "object"},
                 {"properties", {{"relevance", {{"type", "integer"}, {"enum", {0, 1, 2, 3}}}}}},
                 {"required", {"relevance"}},
                 {"additionalProperties", false}};
  return {{"model", model_},
          {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})},
          {"temperature", temperature_},
          {"seed", seed_},
          {"response_format",
           {{"type", "json_schema"}, {"json_schema", {{"name", "relevance"}, {"strict", true}, {"schema", schema}}}}}};
}

std::string OpenAiCompatProvider::complete(const JudgeRequest& request) {
  net::HttpClient client(url_);
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  auto body = request_body(request).dump(-1, ' ', false, Json::error_handler_t::replace);
  net::HttpResponse res = client.post_json("/chat/completions", body, headers);
  if (res.status == 0) throw Error(ErrorCode::kProvider, "judge request failed: " + res.transport_error);
  if (res.status == 429) {
    std::optional<std::chrono::milliseconds> after;
    if (auto h = res.header("retry-after")) {
      try {
        after = std::chrono::milliseconds(static_cast<std::int64_t>(std::stod(*h) * 1000));
      } catch (const std::exception&) {
        // HTTP-date form; fall back to exponential backoff
      }
    }
    throw RateLimited("judge provider rate limited the request", after);
  }
  if (!res.ok()) throw Error(ErrorCode::kProvider, "judge provider returned HTTP " + std::to_string(res.status));
  Json j = Json::parse(res.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kProvider, "judge provider returned a non-JSON body");
  try {
    const Json& content = j.at("choices").at(0).at("message").at("content");
    return content.is_string() ? content.get<std::string>() : content.dump();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kProvider, std::string("unexpected chat completion shape: ") + e.what());
  }
}

std::string LexicalMockProvider::complete(const JudgeRequest& request) {
  auto q = tokenize_terms(request.query);
  std::set<std::string> wanted(q.begin(), q.end());
  auto p = tokenize_terms(request.passage);
  std::unordered_set<std::string> have(p.begin(), p.end());
  std::size_t hits = 0;
  for (const auto& t : wanted) hits += have.count(t);
  // floor(3 * coverage): full coverage is the only way to reach 3.
  int grade = wanted.empty() ? 0 : static_cast<int>(3 * hits / wanted.size());
  return "{\"relevance\": " + std::to_string(grade) + "}";
}

TranscriptProvider::TranscriptProvider(const std::filesystem::path& transcript) {
  for (const auto& row : read_jsonl(transcript.string())) {
    try {
      const Json& r = row.at("response");
      responses_[row.at("id").get<std::string>()] = r.is_string() ? r.get<std::string>() : r.dump();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, transcript.string() + ": " + e.what());
    }
  }
}

std::string TranscriptProvider::complete(const JudgeRequest& request) {
  auto it = responses_.find(request.entity_id);
  if (it == responses_.end()) throw Error(ErrorCode::kProvider, "no transcript entry for " + request.entity_id);
  return it->second;
}

Json JudgeVerdict::to_json() const {
  Json j = {{"query_id", query_id}, {"entity_id", entity_id}, {"model_id", model_id}};
  if (judge_error) {
    j["judge_error"] = true;
    j["error"] = error;
  } else {
    j["grade"] = grade;
    j["binary"] = binary;
  }
  j["raw_response"] = raw_response;
  j["attempts"] = attempts;
  j["truncated"] = truncated;
  j["latency_ms"] = latency_ms;
  return j;
}

Json JudgeReport::to_json() const {
  return {{"pairs", pairs}, {"judged", judged}, {"judge_errors", errors}, {"skipped", skipped},
          {"provider_calls", provider_calls}};
}

Json BatchStatus::to_json() const {
  return {{"requested", requested}, {"ingested", ingested}, {"judge_errors", errors}, {"skipped", skipped},
          {"pending", pending}};
}

JudgeRunner::JudgeRunner(JudgeConfig config, JudgeProvider* provider, annotate::AnnotationStore& store,
                         std::filesystem::path verdict_log, Backoff backoff)
    : config_(std::move(config)),
      provider_(provider),
      store_(store),
      verdict_log_(std::move(verdict_log)),
      backoff_(std::move(backoff)) {
  config_.validate();
  if (!backoff_.sleep) backoff_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  clock_ = [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
}

std::string JudgeRunner::custom_id(const JudgePair& pair) { return pair.query.query_id + ":" + pair.entity.entity_id; }

std::string JudgeRunner::call_provider(const JudgeRequest& request) {
  if (!provider_) throw Error(ErrorCode::kConfig, "no judge provider configured");
  auto delay = backoff_.base;
  for (int limited = 0;; ++limited) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard lock(gate_mu_);
      auto now = std::chrono::steady_clock::now();
      if (not_before_ > now) wait = std::chrono::duration_cast<std::chrono::milliseconds>(not_before_ - now);
    }
    if (wait.count() > 0) backoff_.sleep(wait);
    {
      std::lock_guard lock(calls_mu_);
      ++calls_;
    }
    try {
      return provider_->complete(request);
    } catch (const RateLimited& e) {
      if (limited + 1 >= backoff_.max_rate_limited) throw Error(ErrorCode::kProvider, "rate limited too many times");
      auto pause = std::min(e.retry_after.value_or(delay), backoff_.cap);
      delay = std::min(delay * 2, backoff_.cap);
      {
        // All workers hold off until the window passes.
        std::lock_guard lock(gate_mu_);
        not_before_ = std::max(not_before_, std::chrono::steady_clock::now() + pause);
      }
      backoff_.sleep(pause);
    }
  }
}

JudgeVerdict JudgeRunner::evaluate(const JudgePair& pair) {
  JudgeVerdict v;
  v.query_id = pair.query.query_id;
  v.entity_id = pair.entity.entity_id;
  v.model_id = config_.model_id;
  RenderedPrompt prompt = render_prompt(config_, pair.query.text, pair.entity);
  v.truncated = prompt.truncated;
  JudgeRequest request{prompt.text, pair.query.text, prompt.passage, pair.query.query_id, pair.entity.entity_id};
  std::int64_t start = clock_();
  for (int attempt = 1; attempt <= config_.max_retries; ++attempt) {
    v.attempts = attempt;
    try {
      v.raw_response = call_provider(request);
    } catch (const Error& e) {
      v.judge_error = true;
      v.error = e.what();
      break;
    }
    if (auto grade = parse_relevance(v.raw_response)) {
      v.grade = *grade;
      v.binary = collapse_grade(*grade);
      v.judge_error = false;
      v.error.clear();
      v.latency_ms = clock_() - start;
      return v;
    }
    v.judge_error = true;
    v.error = "malformed judge response";
  }
  v.latency_ms = clock_() - start;
  return v;
}

void JudgeRunner::record(const JudgeVerdict& v) {
  if (!v.judge_error) store_.record_label(v.model_id, v.query_id, v.entity_id, v.binary, annotate::LabelSource::kLlm);
  if (!verdict_log_.empty()) {
    std::lock_guard lock(log_mu_);
    append_jsonl_line(verdict_log_.string(), v.to_json());
  }
}

JudgeVerdict JudgeRunner::judge_pair(const JudgePair& pair) {
  JudgeVerdict v = evaluate(pair);
  record(v);
  return v;
}

JudgeReport JudgeRunner::run(const std::vector<JudgePair>& pairs) {
  JudgeReport report;
  report.pairs = pairs.size();
  std::set<std::pair<std::string, std::string>> done;
  for (const auto& r : store_.export_annotator(config_.model_id)) done.emplace(r.query_id, r.entity_id);

  std::vector<const JudgePair*> todo;
  std::set<std::pair<std::string, std::string>> queued;
  for (const auto& p : pairs) {
    std::pair<std::string, std::string> key{p.query.query_id, p.entity.entity_id};
    if (done.count(key) || !queued.insert(key).second) {
      ++report.skipped;
      continue;
    }
    todo.push_back(&p);
  }

  std::size_t calls_before = calls_;
  std::vector<JudgeVerdict> results(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) results[i] = evaluate(*todo[i]);
  };
  std::size_t n_threads = std::min<std::size_t>(config_.concurrency, todo.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  if (n_threads > 0) worker();
  for (auto& t : threads) t.join();

  for (auto& v : results) {
    record(v);
    if (v.judge_error) ++report.errors;
    else ++report.judged;
  }
  report.provider_calls = calls_ - calls_before;
  report.verdicts = std::move(results);
  return report;
}

BatchStatus JudgeRunner::judge_batch(const std::vector<JudgePair>& pairs, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  BatchStatus status;
  std::set<std::pair<std::string, std::string>> done;
  for (const auto& r : store_.export_annotator(config_.model_id)) done.emplace(r.query_id, r.entity_id);

  std::map<std::string, const JudgePair*> open;
  for (const auto& p : pairs) {
    if (done.count({p.query.query_id, p.entity.entity_id})) {
      ++status.skipped;
      continue;
    }
    open.emplace(custom_id(p), &p);
  }

  fs::path requests = dir / "requests.jsonl";
  fs::path responses = dir / "responses.jsonl";
  fs::path errors_file = dir / "errors.jsonl";

  // Malformed responses are recorded once; later polls leave them alone.
  std::set<std::string> failed;
  if (fs::exists(errors_file)) {
    for (const auto& row : read_jsonl(errors_file.string())) failed.insert(row.at("custom_id").get<std::string>());
  }

  if (!fs::exists(requests)) {
    fs::create_directories(dir);
    std::vector<Json> rows;
    for (const auto& [id, p] : open) {
      RenderedPrompt prompt = render_prompt(config_, p->query.text, p->entity);
      rows.push_back({{"custom_id", id}, {"model", config_.model_id}, {"query_id", p->query.query_id},
                      {"entity_id", p->entity.entity_id}, {"query", p->query.text}, {"passage", prompt.passage},
                      {"prompt", prompt.text}});
    }
    status.requested = rows.size();
    write_file_atomic(requests.string(), to_jsonl(rows));
  }

  if (fs::exists(responses)) {
    for (const auto& row : read_jsonl(responses.string())) {
      std::string id = row.value("custom_id", "");
      auto it = open.find(id);
      if (it == open.end() || failed.count(id)) continue;
      JudgeVerdict v;
      v.query_id = it->second->query.query_id;
      v.entity_id = it->second->entity.entity_id;
      v.model_id = config_.model_id;
      v.attempts = 1;
      auto resp = row.find("response");
      if (resp != row.end()) v.raw_response = resp->is_string() ? resp->get<std::string>() : resp->dump();
      if (auto grade = parse_relevance(v.raw_response)) {
        v.grade = *grade;
        v.binary = collapse_grade(*grade);
        ++status.ingested;
      } else {
        v.judge_error = true;
        v.error = "malformed judge response";
        append_jsonl_line(errors_file.string(), {{"custom_id", id}});
        failed.insert(id);
        ++status.errors;
      }
      record(v);
      open.erase(it);
    }
  }
  for (const auto& [id, p] : open) {
    if (!failed.count(id)) status.pending.push_back(id);
  }
  return status;
}

std::size_t answer_batch_file(const std::filesystem::path& requests, const std::filesystem::path& responses,
                              JudgeProvider& provider) {
  std::vector<Json> out;
  for (const auto& row : read_jsonl(requests.string())) {
    JudgeRequest r{row.at("prompt").get<std::string>(), row.value("query", ""), row.value("passage", ""),
                   row.value("query_id", ""), row.value("entity_id", "")};
    out.push_back({{"custom_id", row.at("custom_id")}, {"response", provider.complete(r)}});
  }
  write_file_atomic(responses.string(), to_jsonl(out));
  return out.size();
}

}  // namespace relbench::judge
