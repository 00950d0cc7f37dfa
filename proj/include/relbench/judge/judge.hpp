#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relbench/annotate/store.hpp"
#include "relbench/common/error.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/corpus/corpus.hpp"

namespace relbench::judge {

enum class ProviderKind { kOpenAiCompat, kBatchFile };

// Graded 0-3 relevance prompt in the UMBRELA style, asking for a JSON object
// {"relevance": <0-3>}.
extern const char* const kDefaultPromptTemplate;

struct JudgeConfig {
  std::string model_id;
  ProviderKind provider = ProviderKind::kOpenAiCompat;
  std::string prompt_template = kDefaultPromptTemplate;
  int max_retries = 3;  // attempts per pair before it becomes a judge_error
  double temperature = 0.0;
  int seed = 0;
  std::size_t passage_budget = 12000;  // characters
  int concurrency = 4;

  // Throws Error(kConfig) unless {query} and {passage} each occur exactly once
  // and the numeric fields are in range.
  void validate() const;
};

struct RenderedPrompt {
  std::string text;
  std::string passage;
  bool truncated = false;
};

// Passage = docstring + "\n" + code (code alone without documentation), cut
// to the character budget without splitting a UTF-8 sequence.
RenderedPrompt render_prompt(const JudgeConfig& config, std::string_view query, const corpus::CodeEntity& entity);

// 0 -> 0; 1, 2, 3 -> 1. Throws Error(kPrecondition) for other grades.
int collapse_grade(int grade);

// The whole response must be a JSON object whose "relevance" is an integer in
// 0..3. No free-text salvage.
std::optional<int> parse_relevance(std::string_view response);

struct JudgeRequest {
  std::string prompt;
  std::string query;
  std::string passage;
  std::string query_id;
  std::string entity_id;
};

// Thrown by providers on HTTP 429.
class RateLimited : public Error {
 public:
  RateLimited(const std::string& message, std::optional<std::chrono::milliseconds> retry_after)
      : Error(ErrorCode::kProvider, message), retry_after(retry_after) {}
  std::optional<std::chrono::milliseconds> retry_after;
};

class JudgeProvider {
 public:
  virtual ~JudgeProvider() = default;
  // Raw model output for one request. Transport failures throw
  // Error(kProvider); rate limiting throws RateLimited.
  virtual std::string complete(const JudgeRequest& request) = 0;
};

// Chat-completions endpoint: POST <url>/chat/completions with a JSON-schema
// response format. Reads JUDGE_URL and JUDGE_API_KEY via from_env().
class OpenAiCompatProvider : public JudgeProvider {
 public:
  OpenAiCompatProvider(std::string url, std::string api_key, const JudgeConfig& config);
  static std::unique_ptr<OpenAiCompatProvider> from_env(const JudgeConfig& config);
  std::string complete(const JudgeRequest& request) override;
  Json request_body(const JudgeRequest& request) const;

 private:
  std::string url_;
  std::string api_key_;
  std::string model_;
  double temperature_;
  int seed_;
};

// Offline judge: grades by the share of distinct query terms that occur in
// the passage (under a third 0, under two thirds 1, partial 2, all of them 3).
class LexicalMockProvider : public JudgeProvider {
 public:
  std::string complete(const JudgeRequest& request) override;
};

// Replays recorded responses from JSONL lines {"id": <entity id>, "response": <text>}.
// Requests for an entity without a line fail with Error(kProvider).
class TranscriptProvider : public JudgeProvider {
 public:
  explicit TranscriptProvider(const std::filesystem::path& transcript);
  std::string complete(const JudgeRequest& request) override;

 private:
  std::map<std::string, std::string> responses_;
};

struct JudgeVerdict {
  std::string query_id;
  std::string entity_id;
  int grade = -1;   // -1 for judge errors
  int binary = -1;  // -1 for judge errors
  std::string raw_response;
  std::string model_id;
  std::int64_t latency_ms = 0;
  bool judge_error = false;
  std::string error;
  int attempts = 0;
  bool truncated = false;

  Json to_json() const;
};

struct JudgePair {
  annotate::QueryRecord query;
  corpus::CodeEntity entity;
};

struct JudgeReport {
  std::size_t pairs = 0;
  std::size_t judged = 0;
  std::size_t errors = 0;
  std::size_t skipped = 0;  // judged in an earlier run
  std::size_t provider_calls = 0;
  std::vector<JudgeVerdict> verdicts;  // new verdicts and errors, in pair order

  Json to_json() const;
};

struct BatchStatus {
  std::size_t requested = 0;  // lines written to the request file this call
  std::size_t ingested = 0;   // verdicts recorded this call
  std::size_t errors = 0;     // malformed responses this call
  std::size_t skipped = 0;    // already judged before this call
  std::vector<std::string> pending;  // custom ids still awaiting a response

  Json to_json() const;
};

struct Backoff {
  std::chrono::milliseconds base{1000};
  std::chrono::milliseconds cap{60000};
  int max_rate_limited = 6;  // consecutive 429s tolerated per pair
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Runs judgments and records verdicts as labels (annotator = model id,
// source = llm). Verdicts and errors are also appended to `verdict_log`.
class JudgeRunner {
 public:
  JudgeRunner(JudgeConfig config, JudgeProvider* provider, annotate::AnnotationStore& store,
              std::filesystem::path verdict_log, Backoff backoff = {});

  // One pair, recorded immediately.
  JudgeVerdict judge_pair(const JudgePair& pair);

  // Pairs already labelled by this model are skipped. Up to
  // config.concurrency requests are in flight; verdicts are recorded in pair order.
  JudgeReport run(const std::vector<JudgePair>& pairs);

  // File-based batch pathway under `dir`: writes requests.jsonl for unjudged
  // pairs and, once responses.jsonl exists, ingests whatever it contains.
  // Calling again polls; ingested pairs are never recorded twice.
  BatchStatus judge_batch(const std::vector<JudgePair>& pairs, const std::filesystem::path& dir);

  static std::string custom_id(const JudgePair& pair);

  // Millisecond clock used for latency_ms; replaceable for reproducible logs.
  void set_clock(std::function<std::int64_t()> clock) { clock_ = std::move(clock); }

 private:
  JudgeVerdict evaluate(const JudgePair& pair);
  std::string call_provider(const JudgeRequest& request);
  void record(const JudgeVerdict& v);

  JudgeConfig config_;
  JudgeProvider* provider_;
  annotate::AnnotationStore& store_;
  std::filesystem::path verdict_log_;
  Backoff backoff_;
  std::mutex gate_mu_;
  std::chrono::steady_clock::time_point not_before_{};
  std::mutex log_mu_;
  std::size_t calls_ = 0;
  std::mutex calls_mu_;
  std::function<std::int64_t()> clock_;
};

// Answers a request file with a provider, writing {custom_id, response} lines.
// Used for offline batch runs.
std::size_t answer_batch_file(const std::filesystem::path& requests, const std::filesystem::path& responses,
                              JudgeProvider& provider);

}  // namespace relbench::judge
