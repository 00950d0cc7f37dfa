#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>

namespace relbench::net {

struct HttpResponse {
  int status = 0;  // 0 when no response was received
  std::string body;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string transport_error;                 // set when status == 0

  bool ok() const { return status >= 200 && status < 300; }
  std::optional<std::string> header(const std::string& lowercase_name) const;
};

// Blocking JSON-over-HTTP client for one base URL such as
// "https://api.example.com/v1". Request paths are appended to the base path.
class HttpClient {
 public:
  explicit HttpClient(const std::string& base_url, std::chrono::seconds timeout = std::chrono::seconds(60));

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& headers = {}) const;
  HttpResponse get(const std::string& path, const std::map<std::string, std::string>& headers = {}) const;

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::string base_path_;
  std::chrono::seconds timeout_;
};

}  // namespace relbench::net
