#pragma once

#include <memory>
#include <string>

#include "relbench/service/workspace.hpp"

namespace httplib {
class Server;
}

namespace relbench::service {

// JSON API over a Workspace. Errors come back as {"error", "message"} with
// 400 for bad input, 404 for unknown objects and 409 for state problems
// such as a missing index.
class Server {
 public:
  explicit Server(Workspace& workspace);
  ~Server();

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();
  void wait_until_ready();

 private:
  void routes();
  Workspace& ws_;
  std::unique_ptr<httplib::Server> http_;
};

// Maps an error code to the HTTP status the API reports for it.
int http_status(ErrorCode code);

}  // namespace relbench::service
