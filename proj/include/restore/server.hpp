#pragma once

#include <memory>
#include <string>

namespace restore::run {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Defaults for POST /session bodies that leave them out.
  std::string case_path;
  std::string truth_path;
  bool interactive = false;
};

// HTTP/JSON front end over Session. Reads are served from the snapshot taken
// after the last command; commands on one session run one at a time in
// arrival order.
class SessionServer {
 public:
  explicit SessionServer(ServerOptions o);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  // Binds the configured port and serves until stop().
  void listen();
  // Binds any free port and returns it; serve with listen_after_bind().
  int bind_any_port();
  void listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace restore::run
