#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mmsched/sched_env.h"

namespace mmsched {

inline constexpr int kProtocolVersion = 1;

using EnvFactory = std::function<std::unique_ptr<SchedulingEnv>()>;

// One protocol session over one environment. Strict request/reply: every
// input line yields exactly one reply line (without the trailing newline).
class ServerSession {
 public:
  explicit ServerSession(std::unique_ptr<SchedulingEnv> env);

  // Never throws.
  std::string handle_line(std::string_view line);
  bool finished() const { return finished_; }

 private:
  std::unique_ptr<SchedulingEnv> env_;
  bool greeted_ = false;
  bool finished_ = false;
  int next_episode_ = 0;
};

// Serves one session over a pair of streams until "bye" or end of input.
void serve_stream(std::istream& in, std::ostream& out, const EnvFactory& factory);

// Accepts TCP connections, one session and one thread per connection.
class TcpServer {
 public:
  // Binds and listens immediately; port 0 picks a free port. Throws
  // Error(kConfig) when the address cannot be bound.
  TcpServer(const std::string& host, int port, EnvFactory factory);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  // Blocks accepting connections until stop().
  void run();
  void stop();

 private:
  void serve_connection(int fd);

  EnvFactory factory_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::vector<std::thread> workers_;
};

// "stdio" or "tcp:host:port".
struct Endpoint {
  bool tcp = false;
  std::string host;
  int port = 0;
};
Endpoint parse_endpoint(std::string_view text);

}  // namespace mmsched
