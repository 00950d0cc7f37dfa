#include "relbench/service/server.hpp"

#include <httplib.h>

#include "relbench/common/error.hpp"

namespace relbench::service {

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

Json parse_body(const httplib::Request& req) {
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return j;
}

std::string required_string(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorCode::kParse, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::string required_param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key) || req.get_param_value(key).empty()) {
    throw Error(ErrorCode::kParse, std::string("missing query parameter '") + key + "'");
  }
  return req.get_param_value(key);
}

// Runs a handler, turning library errors into JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "parse_error", e.what());
    }
  };
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kConfig:
    case ErrorCode::kPrecondition:
    case ErrorCode::kDimensionMismatch:
      return 400;
    case ErrorCode::kPath:
    case ErrorCode::kReferential:
      return 404;
    case ErrorCode::kMissingIndex:
    case ErrorCode::kConflict:
    case ErrorCode::kCollision:
    case ErrorCode::kNoAnnotations:
      return 409;
    case ErrorCode::kProvider:
      return 502;
    default:
      return 500;
  }
}

Server::Server(Workspace& workspace) : ws_(workspace), http_(std::make_unique<httplib::Server>()) { routes(); }

Server::~Server() = default;

int Server::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  if (!http_->bind_to_port(host, port)) throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  return port;
}

void Server::listen() { http_->listen_after_bind(); }
void Server::stop() { http_->stop(); }
void Server::wait_until_ready() { http_->wait_until_ready(); }

void Server::routes() {
  auto& s = *http_;

  s.Get("/repos", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json repos = Json::array();
    for (const auto& name : ws_.repos()) {
      auto entities = ws_.corpus(name);
      auto stats = corpus::compute_stats(*entities);
      Json j = {{"name", name},
                {"functions", stats.function_count},
                {"lines_of_code", stats.lines_of_code},
                {"pct_docs_absent", stats.pct_docs_absent}};
      for (const auto& spec : ws_.config().repos) {
        if (spec.name == name) {
          j["language"] = corpus::language_name(spec.language);
          j["commit"] = spec.commit;
        }
      }
      repos.push_back(j);
    }
    send_json(res, {{"repos", repos}});
  }));

  s.Get("/retrievers", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    for (const auto& r : ws_.config().retrievers) {
      Json indexed = Json::array();
      for (const auto& repo : ws_.repos()) {
        try {
          index::read_index_meta(ws_.config().data_dir, repo, r);
          indexed.push_back(repo);
        } catch (const Error&) {
        }
      }
      out.push_back({{"name", r.name()}, {"fingerprint", r.fingerprint()}, {"config", r.to_json()}, {"indexed", indexed}});
    }
    send_json(res, {{"retrievers", out}});
  }));

  s.Get("/queries", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"queries", ws_.predefined_queries()}});
  }));

  s.Post("/search", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Json body = parse_body(req);
    auto config = ws_.resolve_retriever(required_string(body, "retriever"));
    send_json(res, ws_.search(required_string(body, "query"), required_string(body, "repo"), config).to_json());
  }));

  s.Post("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Json body = parse_body(req);
    auto label = body.find("label");
    if (label == body.end() || !label->is_number_integer()) throw Error(ErrorCode::kParse, "label must be 0 or 1");
    auto rec = ws_.annotate(required_string(body, "query_id"), required_string(body, "entity_id"), label->get<int>(),
                            required_string(body, "annotator_id"));
    send_json(res, rec.to_json(), 201);
  }));

  s.Get("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::string qid = required_param(req, "query_id");
    if (!ws_.store().find_query(qid)) throw Error(ErrorCode::kReferential, "unknown query " + qid);
    Json labels = Json::array();
    for (const auto& r : ws_.labels(qid)) labels.push_back(r.to_json());
    send_json(res, {{"query_id", qid}, {"labels", labels}});
  }));

  s.Post("/judge/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Json body = parse_body(req);
    std::string repo = required_string(body, "repo");
    auto config = ws_.resolve_retriever(required_string(body, "retriever"));
    std::string model = required_string(body, "model");
    judge::JudgeConfig jc;
    jc.model_id = model;
    for (const auto& j : ws_.config().judges) {
      if (j.model_id == model) jc = j;
    }
    std::string mock = body.value("mock", "");
    if (jc.provider == judge::ProviderKind::kBatchFile && mock.empty()) {
      send_json(res, ws_.run_judge_batch(repo, config, jc).to_json());
      return;
    }
    std::unique_ptr<judge::JudgeProvider> provider;
    if (mock == "lexical") provider = std::make_unique<judge::LexicalMockProvider>();
    else if (!mock.empty()) throw Error(ErrorCode::kParse, "mock must be \"lexical\"");
    else provider = judge::OpenAiCompatProvider::from_env(jc);
    send_json(res, ws_.run_judge(repo, config, jc, *provider).to_json());
  }));

  s.Get("/metrics", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto config = ws_.resolve_retriever(required_param(req, "retriever"));
    std::string human = req.has_param("annotator") ? req.get_param_value("annotator") : "";
    auto report = ws_.report(required_param(req, "repo"), config, required_param(req, "judge"), human);
    Json j = report.to_json();
    j["table"] = metrics::render_report_table({report});
    j["crosstab_table"] = metrics::render_crosstab(report.cross_tab, report.source_a + " / " + report.source_b);
    send_json(res, j);
  }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, "not_found", "no such endpoint");
  });
}

}  // namespace relbench::service
