#include "relbench/net/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

#include "relbench/common/error.hpp"

namespace relbench::net {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

HttpResponse convert(const httplib::Result& res) {
  HttpResponse out;
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[lowercase(k)] = v;
  return out;
}

httplib::Headers to_headers(const std::map<std::string, std::string>& headers) {
  return httplib::Headers(headers.begin(), headers.end());
}

}  // namespace

std::optional<std::string> HttpResponse::header(const std::string& lowercase_name) const {
  auto it = headers.find(lowercase_name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

HttpClient::HttpClient(const std::string& base_url, std::chrono::seconds timeout) : timeout_(timeout) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kConfig, "URL needs a scheme: " + base_url);
  auto path_start = base_url.find('/', scheme_end + 3);
  origin_ = base_url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

HttpResponse HttpClient::post_json(const std::string& path, const std::string& body,
                                   const std::map<std::string, std::string>& headers) const {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_write_timeout(timeout_);
  return convert(cli.Post(base_path_ + path, to_headers(headers), body, "application/json"));
}

HttpResponse HttpClient::get(const std::string& path, const std::map<std::string, std::string>& headers) const {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  return convert(cli.Get(base_path_ + path, to_headers(headers)));
}

}  // namespace relbench::net
