#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"
#include "relbench/judge/judge.hpp"

namespace fs = std::filesystem;
using namespace relbench;
using namespace relbench::judge;
using annotate::AnnotationStore;
using annotate::LabelSource;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("relbench_judge_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void expect_error(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

corpus::CodeEntity entity(const std::string& id, const std::string& code, const std::string& doc = "") {
  corpus::CodeEntity e;
  e.entity_id = id;
  e.repo = "repo";
  e.rel_path = "a.py";
  e.function_name = id;
  e.code = code;
  e.docstring = doc;
  return e;
}

JudgeRequest request(const std::string& prompt, const std::string& query, const std::string& passage) {
  JudgeRequest r;
  r.prompt = prompt;
  r.query = query;
  r.passage = passage;
  return r;
}

JudgeConfig config(const std::string& model = "judge-model") {
  JudgeConfig c;
  c.model_id = model;
  return c;
}

// Replies are looked up by the passage text; each call consumes the next
// reply for that passage, the last one repeating.
class ScriptedProvider : public JudgeProvider {
 public:
  explicit ScriptedProvider(std::map<std::string, std::vector<std::string>> script) : script_(std::move(script)) {}
  std::string complete(const JudgeRequest& request) override {
    std::lock_guard lock(mu_);
    ++calls;
    auto& replies = script_.at(request.passage);
    auto& used = used_[request.passage];
    return replies[std::min(used++, replies.size() - 1)];
  }
  int calls = 0;

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::string>> script_;
  std::map<std::string, std::size_t> used_;
};

// Ten snapshotted entities e0..e9 for one query, with code "code<i>".
struct Fixture {
  explicit Fixture(const std::string& name) : dir(scratch_dir(name)), store(dir / "annotations.db") {
    query = store.register_query("sort a list", "repo", "bm25(k1=1.5,b=0.75,cutoff=10)");
    std::vector<index::RankedResult> results;
    for (int i = 0; i < 10; ++i) {
      std::string id = "e" + std::to_string(i);
      pairs.push_back({query, entity(id, "code" + std::to_string(i))});
      results.push_back({id, i + 1, 10.0 - i});
    }
    store.snapshot_results(query, results);
  }
  fs::path dir;
  AnnotationStore store;
  annotate::QueryRecord query;
  std::vector<JudgePair> pairs;
};

Backoff no_sleep(std::vector<std::chrono::milliseconds>* slept = nullptr) {
  Backoff b;
  b.sleep = [slept](std::chrono::milliseconds d) {
    if (slept) slept->push_back(d);
  };
  return b;
}

std::map<std::string, int> labels_of(const AnnotationStore& store, const std::string& annotator) {
  std::map<std::string, int> out;
  for (const auto& r : store.effective_labels()) {
    if (r.annotator_id == annotator) {
      EXPECT_EQ(r.source, LabelSource::kLlm);
      out[r.entity_id] = r.label;
    }
  }
  return out;
}

}  // namespace

TEST(JudgeConfig, TemplateNeedsEachPlaceholderOnce) {
  EXPECT_NO_THROW(config().validate());
  JudgeConfig c = config();
  c.prompt_template = "Q:{query}";
  expect_error(ErrorCode::kConfig, [&] { c.validate(); });
  c.prompt_template = "{query} {passage} {passage}";
  expect_error(ErrorCode::kConfig, [&] { c.validate(); });
  c.prompt_template = "{passage} then {query}";
  EXPECT_NO_THROW(c.validate());
  c.max_retries = 0;
  expect_error(ErrorCode::kConfig, [&] { c.validate(); });
  expect_error(ErrorCode::kConfig, [] { config("").validate(); });
}

TEST(RenderPrompt, Substitutes) {
  JudgeConfig c = config();
  c.prompt_template = "Q:{query} P:{passage}";
  auto r = render_prompt(c, "q", entity("x", "p"));
  EXPECT_EQ(r.text, "Q:q P:p");
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(render_prompt(c, "q", entity("x", "def f(): pass", "Doc.")).text, "Q:q P:Doc.\ndef f(): pass");
}

TEST(RenderPrompt, PlaceholdersInsideContentStayLiteral) {
  JudgeConfig c = config();
  c.prompt_template = "P:{passage} Q:{query}";
  auto r = render_prompt(c, "find {passage}", entity("x", "s = '{query}'"));
  EXPECT_EQ(r.text, "P:s = '{query}' Q:find {passage}");
}

TEST(RenderPrompt, DefaultTemplateCarriesBothParts) {
  auto r = render_prompt(config(), "reverse a string", entity("x", "def rev(s): return s[::-1]"));
  EXPECT_NE(r.text.find("Query: reverse a string\n"), std::string::npos);
  EXPECT_NE(r.text.find("Passage: def rev(s): return s[::-1]\n"), std::string::npos);
  EXPECT_NE(r.text.find("\"relevance\""), std::string::npos);
}

TEST(RenderPrompt, BudgetTruncatesAndFlags) {
  JudgeConfig c = config();
  c.prompt_template = "{query}|{passage}";
  std::string exact(12000, 'a');
  auto fits = render_prompt(c, "q", entity("x", exact));
  EXPECT_FALSE(fits.truncated);
  EXPECT_EQ(fits.passage, exact);

  // The docstring, its newline and the code total 12,001 characters.
  std::string doc(5000, 'd');
  std::string code(7000, 'c');
  auto over = render_prompt(c, "q", entity("x", code, doc));
  EXPECT_TRUE(over.truncated);
  EXPECT_EQ(over.passage.size(), 12000u);
  EXPECT_EQ(over.passage, doc + "\n" + code.substr(0, 6999));
  EXPECT_EQ(over.text, "q|" + over.passage);
}

TEST(RenderPrompt, TruncationKeepsCodePointsWhole) {
  JudgeConfig c = config();
  c.passage_budget = 4;
  // "ab" then U+00E9 (2 bytes) then U+20AC (3 bytes): the cut lands inside the euro sign.
  auto r = render_prompt(c, "q", entity("x", "ab\xC3\xA9\xE2\x82\xAC"));
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.passage, "ab\xC3\xA9");
  c.passage_budget = 3;
  EXPECT_EQ(render_prompt(c, "q", entity("x", "ab\xC3\xA9")).passage, "ab");
}

TEST(Collapse, ZeroStaysZeroEverythingElseIsOne) {
  EXPECT_EQ(collapse_grade(0), 0);
  EXPECT_EQ(collapse_grade(1), 1);
  EXPECT_EQ(collapse_grade(2), 1);
  EXPECT_EQ(collapse_grade(3), 1);
  expect_error(ErrorCode::kPrecondition, [] { collapse_grade(4); });
  expect_error(ErrorCode::kPrecondition, [] { collapse_grade(-1); });
}

TEST(ParseRelevance, StrictStructuredObject) {
  EXPECT_EQ(parse_relevance(R"({"relevance": 2})"), 2);
  EXPECT_EQ(parse_relevance(" {\"relevance\":0}\n"), 0);
  EXPECT_EQ(parse_relevance(R"({"reason": "x", "relevance": 3})"), 3);
  for (const char* bad : {"", "2", "relevance: 2", R"({"relevance": "2"})", R"({"relevance": 2.5})",
                          R"({"relevance": 4})", R"({"relevance": -1})", R"({"score": 2})", R"([{"relevance": 1}])",
                          "```json\n{\"relevance\": 1}\n```", "##final score: 2", R"({"relevance": 1} trailing)"}) {
    EXPECT_FALSE(parse_relevance(bad).has_value()) << bad;
  }
}

TEST(MockProvider, GradesByQueryTermCoverage) {
  LexicalMockProvider mock;
  auto grade = [&](const std::string& q, const std::string& p) { return *parse_relevance(mock.complete(request("", q, p))); };
  EXPECT_EQ(grade("push stack", "def pop(queue): pass"), 0);
  EXPECT_EQ(grade("push onto the stack", "def push(x): pass"), 0);     // 1 of 4
  EXPECT_EQ(grade("push onto stack", "def push(x): pass"), 1);         // 1 of 3
  EXPECT_EQ(grade("push stack", "def push(x): pass"), 1);              // 1 of 2
  EXPECT_EQ(grade("push onto stack", "def push_onto(x): pass"), 2);    // 2 of 3
  EXPECT_EQ(grade("push the stack", "def push_the_stack(x): pass"), 3);
  EXPECT_EQ(grade("push stack", "def pushStack(x): pass"), 3);
  EXPECT_EQ(grade("", "def pushStack(x): pass"), 0);
  EXPECT_EQ(mock.complete(request("", "push stack", "push")), mock.complete(request("", "push stack", "push")));
}

TEST(JudgePair, RecordsCollapsedLabel) {
  Fixture f("pair");
  ScriptedProvider p({{"code0", {R"({"relevance": 2})"}}, {"code1", {R"({"relevance": 0})"}}});
  JudgeRunner runner(config(), &p, f.store, f.dir / "verdicts.jsonl", no_sleep());
  auto v = runner.judge_pair(f.pairs[0]);
  EXPECT_EQ(v.grade, 2);
  EXPECT_EQ(v.binary, 1);
  EXPECT_EQ(v.model_id, "judge-model");
  EXPECT_EQ(v.raw_response, R"({"relevance": 2})");
  EXPECT_FALSE(v.judge_error);
  auto v0 = runner.judge_pair(f.pairs[1]);
  EXPECT_EQ(v0.grade, 0);
  EXPECT_EQ(v0.binary, 0);
  EXPECT_EQ(labels_of(f.store, "judge-model"), (std::map<std::string, int>{{"e0", 1}, {"e1", 0}}));
  EXPECT_EQ(read_jsonl((f.dir / "verdicts.jsonl").string()).size(), 2u);
}

TEST(JudgePair, GarbageThreeTimesIsOneJudgeError) {
  Fixture f("garbage");
  ScriptedProvider p({{"code0", {"I think it is relevant.", "{\"relevance\": 7}", "2"}}});
  JudgeRunner runner(config(), &p, f.store, f.dir / "verdicts.jsonl", no_sleep());
  auto report = runner.run({f.pairs[0]});
  EXPECT_EQ(p.calls, 3);
  EXPECT_EQ(report.errors, 1u);
  EXPECT_EQ(report.judged, 0u);
  ASSERT_EQ(report.verdicts.size(), 1u);
  EXPECT_TRUE(report.verdicts[0].judge_error);
  EXPECT_EQ(report.verdicts[0].attempts, 3);
  EXPECT_TRUE(labels_of(f.store, "judge-model").empty());
  auto log = read_jsonl((f.dir / "verdicts.jsonl").string());
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0]["judge_error"], true);
  EXPECT_FALSE(log[0].contains("binary"));
}

TEST(JudgePair, RecoversOnRetry) {
  Fixture f("retry");
  ScriptedProvider p({{"code0", {"nope", R"({"relevance": 1})"}}});
  JudgeRunner runner(config(), &p, f.store, "", no_sleep());
  auto v = runner.judge_pair(f.pairs[0]);
  EXPECT_FALSE(v.judge_error);
  EXPECT_EQ(v.attempts, 2);
  EXPECT_EQ(v.binary, 1);
  EXPECT_EQ(p.calls, 2);
}

TEST(JudgeRun, TwoMalformedOfTen) {
  Fixture f("run10");
  std::map<std::string, std::vector<std::string>> script;
  std::map<std::string, int> expected;
  for (int i = 0; i < 10; ++i) {
    std::string code = "code" + std::to_string(i);
    if (i == 3 || i == 7) {
      script[code] = {"not json"};
    } else {
      script[code] = {"{\"relevance\": " + std::to_string(i % 4) + "}"};
      expected["e" + std::to_string(i)] = i % 4 == 0 ? 0 : 1;
    }
  }
  ScriptedProvider p(script);
  JudgeRunner runner(config(), &p, f.store, f.dir / "verdicts.jsonl", no_sleep());
  auto report = runner.run(f.pairs);
  EXPECT_EQ(report.pairs, 10u);
  EXPECT_EQ(report.judged, 8u);
  EXPECT_EQ(report.errors, 2u);
  EXPECT_EQ(p.calls, 8 + 2 * 3);
  EXPECT_EQ(labels_of(f.store, "judge-model"), expected);
  ASSERT_EQ(report.verdicts.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(report.verdicts[i].entity_id, "e" + std::to_string(i));
}

TEST(JudgeRun, RerunMakesNoCalls) {
  Fixture f("rerun");
  std::map<std::string, std::vector<std::string>> script;
  for (int i = 0; i < 10; ++i) script["code" + std::to_string(i)] = {R"({"relevance": 3})"};
  ScriptedProvider p(script);
  JudgeRunner runner(config(), &p, f.store, f.dir / "verdicts.jsonl", no_sleep());
  auto first = runner.run(f.pairs);
  EXPECT_EQ(first.judged, 10u);
  EXPECT_EQ(first.errors, 0u);
  EXPECT_EQ(p.calls, 10);
  auto second = runner.run(f.pairs);
  EXPECT_EQ(p.calls, 10);
  EXPECT_EQ(second.provider_calls, 0u);
  EXPECT_EQ(second.skipped, 10u);
  EXPECT_EQ(f.store.log().size(), 10u);

  // A different model id is a different annotator and is judged afresh.
  JudgeRunner other(config("other-model"), &p, f.store, "", no_sleep());
  EXPECT_EQ(other.run(f.pairs).judged, 10u);
  EXPECT_EQ(p.calls, 20);
}

TEST(JudgeRun, DuplicatePairsJudgedOnce) {
  Fixture f("dups");
  ScriptedProvider p({{"code0", std::vector<std::string>{R"({"relevance": 1})"}}});
  JudgeRunner runner(config(), &p, f.store, "", no_sleep());
  auto report = runner.run({f.pairs[0], f.pairs[0]});
  EXPECT_EQ(report.judged, 1u);
  EXPECT_EQ(report.skipped, 1u);
  EXPECT_EQ(p.calls, 1);
}

TEST(JudgeRun, BoundedConcurrency) {
  Fixture f("concurrency");
  class Slow : public JudgeProvider {
   public:
    std::string complete(const JudgeRequest&) override {
      int now = ++in_flight;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --in_flight;
      return R"({"relevance": 1})";
    }
    std::atomic<int> in_flight{0}, peak{0};
  } slow;
  JudgeConfig c = config();
  c.concurrency = 3;
  JudgeRunner runner(c, &slow, f.store, "", no_sleep());
  auto report = runner.run(f.pairs);
  EXPECT_EQ(report.judged, 10u);
  EXPECT_LE(slow.peak.load(), 3);
  EXPECT_GE(slow.peak.load(), 2);
}

TEST(JudgeRun, RateLimitBacksOffExponentially) {
  Fixture f("ratelimit");
  class Limited : public JudgeProvider {
   public:
    std::string complete(const JudgeRequest&) override {
      if (++calls <= limit) throw RateLimited("429", std::nullopt);
      return R"({"relevance": 2})";
    }
    int calls = 0, limit = 3;
  } limited;
  std::vector<std::chrono::milliseconds> slept;
  JudgeConfig c = config();
  c.concurrency = 1;
  JudgeRunner runner(c, &limited, f.store, "", no_sleep(&slept));
  auto v = runner.judge_pair(f.pairs[0]);
  EXPECT_FALSE(v.judge_error);
  EXPECT_EQ(v.attempts, 1);  // rate limiting does not use up parse attempts
  ASSERT_GE(slept.size(), 3u);
  EXPECT_EQ(slept[0], std::chrono::milliseconds(1000));
  // Later sleeps come from the shared gate and the pause itself; the pauses double.
  std::vector<std::chrono::milliseconds> pauses;
  for (auto d : slept) {
    if (d.count() >= 1000 && d.count() % 1000 == 0) pauses.push_back(d);
  }
  EXPECT_EQ(pauses, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000),
                                                              std::chrono::milliseconds(2000),
                                                              std::chrono::milliseconds(4000)}));

  limited.calls = 0;
  limited.limit = 100;
  auto failed = runner.judge_pair(f.pairs[1]);
  EXPECT_TRUE(failed.judge_error);
  EXPECT_EQ(limited.calls, 6);
}

TEST(JudgeRun, ReplayIsByteIdentical) {
  auto run_once = [](const std::string& name) {
    Fixture f(name);
    f.store.set_clock([] { return std::int64_t{5}; });
    LexicalMockProvider mock;
    JudgeRunner runner(config(), &mock, f.store, f.dir / "verdicts.jsonl", no_sleep());
    runner.set_clock([] { return std::int64_t{0}; });
    runner.run(f.pairs);
    return read_file((f.dir / "verdicts.jsonl").string()) + to_jsonl([&] {
             std::vector<Json> rows;
             for (const auto& r : f.store.log()) rows.push_back(r.to_json());
             return rows;
           }());
  };
  std::string a = run_once("replay_a");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, run_once("replay_b"));
}

TEST(JudgeBatch, RequestFileThenPartialPollsThenDone) {
  Fixture f("batch");
  JudgeConfig c = config();
  c.provider = ProviderKind::kBatchFile;
  JudgeRunner runner(c, nullptr, f.store, f.dir / "verdicts.jsonl", no_sleep());
  fs::path dir = f.dir / "batch";

  auto first = runner.judge_batch(f.pairs, dir);
  EXPECT_EQ(first.requested, 10u);
  EXPECT_EQ(first.pending.size(), 10u);
  auto requests = read_jsonl((dir / "requests.jsonl").string());
  ASSERT_EQ(requests.size(), 10u);
  for (const auto& r : requests) {
    EXPECT_TRUE(r.contains("custom_id"));
    EXPECT_TRUE(r.contains("prompt"));
  }

  // Six responses arrive; two of them are malformed.
  std::vector<Json> responses;
  for (int i = 0; i < 6; ++i) {
    std::string id = JudgeRunner::custom_id(f.pairs[i]);
    responses.push_back({{"custom_id", id}, {"response", i == 1 || i == 4 ? "oops" : R"({"relevance": 2})"}});
  }
  write_file_atomic((dir / "responses.jsonl").string(), to_jsonl(responses));
  auto partial = runner.judge_batch(f.pairs, dir);
  EXPECT_EQ(partial.requested, 0u);
  EXPECT_EQ(partial.ingested, 4u);
  EXPECT_EQ(partial.errors, 2u);
  EXPECT_EQ(partial.pending.size(), 4u);
  EXPECT_EQ(labels_of(f.store, "judge-model").size(), 4u);

  // Polling again without new responses changes nothing.
  auto again = runner.judge_batch(f.pairs, dir);
  EXPECT_EQ(again.ingested, 0u);
  EXPECT_EQ(again.errors, 0u);
  EXPECT_EQ(again.pending.size(), 4u);
  EXPECT_EQ(f.store.log().size(), 4u);

  for (int i = 6; i < 10; ++i) {
    responses.push_back({{"custom_id", JudgeRunner::custom_id(f.pairs[i])}, {"response", R"({"relevance": 0})"}});
  }
  write_file_atomic((dir / "responses.jsonl").string(), to_jsonl(responses));
  auto done = runner.judge_batch(f.pairs, dir);
  EXPECT_EQ(done.ingested, 4u);
  EXPECT_TRUE(done.pending.empty());
  EXPECT_EQ(f.store.log().size(), 8u);
  EXPECT_EQ(read_jsonl((f.dir / "verdicts.jsonl").string()).size(), 10u);
}

TEST(JudgeBatch, TwoMalformedOfTenViaScriptedFile) {
  Fixture f("batch10");
  std::map<std::string, std::vector<std::string>> script;
  for (int i = 0; i < 10; ++i) script["code" + std::to_string(i)] = {i == 2 || i == 5 ? "{" : R"({"relevance": 1})"};
  ScriptedProvider p(script);
  JudgeRunner runner(config(), nullptr, f.store, "", no_sleep());
  fs::path dir = f.dir / "batch";
  runner.judge_batch(f.pairs, dir);
  EXPECT_EQ(answer_batch_file(dir / "requests.jsonl", dir / "responses.jsonl", p), 10u);
  auto status = runner.judge_batch(f.pairs, dir);
  EXPECT_EQ(status.ingested, 8u);
  EXPECT_EQ(status.errors, 2u);
  EXPECT_TRUE(status.pending.empty());

  // A fresh batch over the same pairs requests only the two failed ones.
  auto rerun = runner.judge_batch(f.pairs, f.dir / "batch2");
  EXPECT_EQ(rerun.skipped, 8u);
  EXPECT_EQ(rerun.requested, 2u);
}

TEST(OpenAiCompat, RequestShapeAndRateLimitRetry) {
  httplib::Server server;
  int requests = 0;
  Json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (++requests == 1) {
      res.status = 429;
      res.set_header("Retry-After", "0");
      return;
    }
    seen = Json::parse(req.body);
    auth = req.get_header_value("Authorization");
    Json reply = {{"choices", Json::array({{{"message", {{"role", "assistant"}, {"content", R"({"relevance":3})"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("JUDGE_URL", ("http://127.0.0.1:" + std::to_string(port) + "/v1").c_str(), 1);
  ::setenv("JUDGE_API_KEY", "secret", 1);
  JudgeConfig c = config("gpt-test");
  c.seed = 7;
  auto provider = OpenAiCompatProvider::from_env(c);
  Fixture f("openai");
  std::vector<std::chrono::milliseconds> slept;
  JudgeRunner runner(c, provider.get(), f.store, "", no_sleep(&slept));
  auto v = runner.judge_pair(f.pairs[0]);
  server.stop();
  t.join();

  EXPECT_EQ(requests, 2);
  EXPECT_FALSE(v.judge_error);
  EXPECT_EQ(v.grade, 3);
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(seen["model"], "gpt-test");
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["seed"], 7);
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_NE(seen["messages"][0]["content"].get<std::string>().find("Passage: code0"), std::string::npos);
  EXPECT_EQ(seen["response_format"]["type"], "json_schema");
  EXPECT_EQ(seen["response_format"]["json_schema"]["schema"]["required"][0], "relevance");
  EXPECT_EQ(slept.front(), std::chrono::milliseconds(0));
}

TEST(OpenAiCompat, ServerErrorBecomesJudgeError) {
  httplib::Server server;
  server.Post("/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  OpenAiCompatProvider provider("http://127.0.0.1:" + std::to_string(port), "", config());
  expect_error(ErrorCode::kProvider, [&] { provider.complete(request("p", "q", "x")); });
  Fixture f("openai500");
  JudgeRunner runner(config(), &provider, f.store, "", no_sleep());
  auto v = runner.judge_pair(f.pairs[0]);
  server.stop();
  t.join();
  EXPECT_TRUE(v.judge_error);
  EXPECT_NE(v.error.find("HTTP 500"), std::string::npos);
}

TEST(Transcript, ReplaysByEntityId) {
  fs::path dir = scratch_dir("transcript");
  write_file_atomic((dir / "t.jsonl").string(),
                    "{\"id\": \"e1\", \"response\": \"{\\\"relevance\\\": 3}\"}\n"
                    "{\"id\": \"e2\", \"response\": {\"relevance\": 0}}\n");
  TranscriptProvider t(dir / "t.jsonl");
  JudgeRequest r = request("", "", "");
  r.entity_id = "e1";
  EXPECT_EQ(parse_relevance(t.complete(r)), 3);
  r.entity_id = "e2";
  EXPECT_EQ(parse_relevance(t.complete(r)), 0);
  r.entity_id = "e3";
  expect_error(ErrorCode::kProvider, [&] { t.complete(r); });
  write_file_atomic((dir / "bad.jsonl").string(), "{\"id\": \"e1\"}\n");
  expect_error(ErrorCode::kParse, [&] { TranscriptProvider bad(dir / "bad.jsonl"); });
}

TEST(OpenAiCompat, MissingUrlIsConfigError) {
  ::unsetenv("JUDGE_URL");
  expect_error(ErrorCode::kConfig, [] { OpenAiCompatProvider::from_env(config()); });
}
