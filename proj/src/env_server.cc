#include "mmsched/env_server.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "mmsched/error.h"

namespace mmsched {

using nlohmann::json;

namespace {

struct ProtocolError {
  std::string code;
  std::string message;
};

json path_metadata(const std::vector<PathInfo>& paths) {
  json out = json::array();
  for (const PathInfo& p : paths) {
    out.push_back({{"id", p.id},
                   {"nodes", p.path.nodes},
                   {"capacity", p.capacity},
                   {"success_prob", p.success_prob}});
  }
  return out;
}

json reset_payload(const ResetResult& r) {
  return {{"state", r.state}, {"r_star", r.r_star}, {"horizon", r.horizon},
          {"paths", path_metadata(r.paths)}};
}

std::string_view wire_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedAction: return "bad_action";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kPrecondition:
    case ErrorCode::kConfig: return "bad_request";
    default: return "internal";
  }
}

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

ServerSession::ServerSession(std::unique_ptr<SchedulingEnv> env) : env_(std::move(env)) {}

std::string ServerSession::handle_line(std::string_view line) {
  json id;
  try {
    json request;
    try {
      request = json::parse(line);
    } catch (const json::exception& e) {
      throw ProtocolError{"parse", e.what()};
    }
    if (!request.is_object()) throw ProtocolError{"bad_request", "message must be an object"};
    if (request.contains("id")) id = request["id"];
    if (!request.contains("type") || !request["type"].is_string()) {
      throw ProtocolError{"bad_request", "missing string field 'type'"};
    }
    const std::string type = request["type"].get<std::string>();

    json reply;
    if (type == "hello") {
      if (finished_) throw ProtocolError{"ordering", "session has ended"};
      greeted_ = true;
      reply = {{"type", "hello"},
               {"protocol", kProtocolVersion},
               {"k", env_->path_count()},
               {"horizon", env_->config().horizon},
               {"epoch_length", env_->config().epoch_length},
               {"kappa", env_->config().kappa},
               {"reselect_patience", env_->config().reselect_patience}};
    } else if (type == "reset" || type == "step" || type == "reselect" || type == "bye") {
      if (finished_) throw ProtocolError{"ordering", "session has ended"};
      if (!greeted_) throw ProtocolError{"ordering", "hello must come first"};
      if (type == "reset") {
        int episode = next_episode_;
        if (request.contains("episode")) {
          const json& e = request["episode"];
          if (!e.is_number_integer() || e.get<long long>() < 0 ||
              e.get<long long>() > 1'000'000'000) {
            throw ProtocolError{"bad_request", "episode must be a nonnegative integer"};
          }
          episode = static_cast<int>(e.get<long long>());
        }
        const ResetResult r = env_->reset(episode);
        next_episode_ = episode + 1;
        reply = reset_payload(r);
        reply["type"] = "reset_ok";
        reply["episode"] = episode;
      } else if (type == "step") {
        if (!env_->started()) throw ProtocolError{"ordering", "step before reset"};
        if (env_->done()) throw ProtocolError{"ordering", "episode is done; reset first"};
        if (!request.contains("action") || !request["action"].is_array()) {
          throw ProtocolError{"bad_action", "missing array field 'action'"};
        }
        std::vector<double> action;
        for (const json& v : request["action"]) {
          if (!v.is_number()) throw ProtocolError{"bad_action", "action entries must be numbers"};
          action.push_back(v.get<double>());
        }
        const StepOutcome s = env_->step(action);
        reply = {{"type", "step_ok"},
                 {"state", s.state},
                 {"reward", s.reward},
                 {"done", s.done},
                 {"accepted", s.accepted},
                 {"delivered_rate", s.delivered_rate},
                 {"t", env_->time_step()}};
      } else if (type == "reselect") {
        if (!env_->started()) throw ProtocolError{"ordering", "reselect before reset"};
        reply = reset_payload(env_->reselect());
        reply["type"] = "reselect_ok";
        reply["episode"] = env_->current().episode;
      } else {
        finished_ = true;
        reply = {{"type", "bye"}};
      }
    } else {
      throw ProtocolError{"unknown_type", "unknown message type '" + type + "'"};
    }
    if (!id.is_null()) reply["id"] = id;
    return dump(reply);
  } catch (const ProtocolError& e) {
    json reply = {{"type", "error"}, {"code", e.code}, {"message", e.message}};
    if (!id.is_null()) reply["id"] = id;
    return dump(reply);
  } catch (const Error& e) {
    json reply = {{"type", "error"}, {"code", wire_code(e.code())}, {"message", e.what()}};
    if (!id.is_null()) reply["id"] = id;
    return dump(reply);
  } catch (const std::exception& e) {
    json reply = {{"type", "error"}, {"code", "internal"}, {"message", e.what()}};
    if (!id.is_null()) reply["id"] = id;
    return dump(reply);
  } catch (...) {
    return R"({"code":"internal","message":"unknown failure","type":"error"})";
  }
}

void serve_stream(std::istream& in, std::ostream& out, const EnvFactory& factory) {
  ServerSession session(factory());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << session.handle_line(line) << '\n';
    out.flush();
    if (session.finished()) break;
  }
}

TcpServer::TcpServer(const std::string& host, int port, EnvFactory factory)
    : factory_(std::move(factory)) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res) != 0 ||
      res == nullptr) {
    throw Error(ErrorCode::kConfig, "cannot resolve " + host);
  }
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int yes = 1;
  if (listen_fd_ >= 0) ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  const bool ok = listen_fd_ >= 0 && ::bind(listen_fd_, res->ai_addr, res->ai_addrlen) == 0 &&
                  ::listen(listen_fd_, 16) == 0;
  freeaddrinfo(res);
  if (!ok) {
    if (listen_fd_ >= 0) ::close(listen_fd_);
    throw Error(ErrorCode::kConfig, "cannot listen on " + host + ":" + service);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpServer::~TcpServer() {
  stop();
  std::lock_guard lock(mutex_);
  for (std::thread& t : workers_) {
    if (t.joinable()) t.join();
  }
}

void TcpServer::run() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) break;
      continue;
    }
    std::lock_guard lock(mutex_);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
  }
}

void TcpServer::serve_connection(int fd) {
  try {
    ServerSession session(factory_());
    std::string buffer;
    char chunk[4096];
    bool open = true;
    while (open && !session.finished()) {
      const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
      if (got <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(got));
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string reply = session.handle_line(line) + "\n";
        std::size_t sent = 0;
        while (sent < reply.size()) {
          const ssize_t n = ::send(fd, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
          if (n <= 0) {
            open = false;
            break;
          }
          sent += static_cast<std::size_t>(n);
        }
        if (!open || session.finished()) break;
      }
    }
  } catch (...) {
  }
  ::close(fd);
}

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  if (text == "stdio") return ep;
  if (text.starts_with("tcp:")) {
    const std::string_view rest = text.substr(4);
    const std::size_t colon = rest.rfind(':');
    if (colon != std::string_view::npos) {
      ep.tcp = true;
      ep.host = std::string(rest.substr(0, colon));
      const std::string port(rest.substr(colon + 1));
      try {
        std::size_t used = 0;
        ep.port = std::stoi(port, &used);
        if (used == port.size() && ep.port >= 0 && ep.port <= 65535) return ep;
      } catch (const std::exception&) {
      }
    }
  }
  throw Error(ErrorCode::kConfig,
              "endpoint must be 'stdio' or 'tcp:host:port', got '" + std::string(text) + "'");
}

}  // namespace mmsched
