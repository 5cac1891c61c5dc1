/*
 * Copyright 2026 The Bytelite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <vector>

#include "bytelite/error.h"
#include "bytelite/gateway.h"
#include "httplib.h"

namespace bytelite {

namespace {

constexpr size_t kMaxRequestHead = 64 * 1024;
constexpr int kPollMillis = 200;

std::string_view Reason(int status) {
  switch (status) {
    case 200: return "OK";
    case 206: return "Partial Content";
    case 400: return "Bad Request";
    case 404: return "Not Found";
    case 416: return "Range Not Satisfiable";
    case 500: return "Internal Server Error";
    case 501: return "Not Implemented";
    case 502: return "Bad Gateway";
    case 504: return "Gateway Timeout";
    default: return "Unknown";
  }
}

bool WriteAll(int fd, const char* data, size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    data += w;
    n -= static_cast<size_t>(w);
  }
  return true;
}

void WriteSimple(int fd, int status, std::string_view body) {
  std::ostringstream s;
  s << "HTTP/1.1 " << status << ' ' << Reason(status) << "\r\n"
    << "Content-Type: application/json\r\nContent-Length: " << body.size()
    << "\r\nConnection: close\r\n\r\n"
    << body;
  const std::string text = s.str();
  WriteAll(fd, text.data(), text.size());
}

// Splits "host:port"; the port defaults to 443 for CONNECT targets.
bool SplitAuthority(const std::string& authority, std::string* host, std::string* port) {
  if (authority.empty()) return false;
  if (authority.front() == '[') {
    const size_t close = authority.find(']');
    if (close == std::string::npos) return false;
    *host = authority.substr(1, close - 1);
    *port = close + 2 <= authority.size() && authority[close + 1] == ':'
                ? authority.substr(close + 2)
                : "443";
  } else {
    const size_t colon = authority.rfind(':');
    *host = authority.substr(0, colon);
    *port = colon == std::string::npos ? "443" : authority.substr(colon + 1);
  }
  return !host->empty() && !port->empty();
}

int ConnectTo(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0) return -1;
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  return fd;
}

}  // namespace

// Minimal forward proxy: one request per connection.  Plain-HTTP GETs go
// through the image service; CONNECT is tunnelled byte-for-byte.
class Gateway::Proxy {
 public:
  Proxy(ImageService* service, std::string bind) : service_(service), bind_(std::move(bind)) {}
  ~Proxy() { Stop(); }

  int Start(int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE | AI_NUMERICHOST;
    addrinfo* res = nullptr;
    const std::string port_text = std::to_string(port);
    if (::getaddrinfo(bind_.c_str(), port_text.c_str(), &hints, &res) != 0 || !res) {
      throw Error(ErrorCode::kNetworkError, "proxy: cannot resolve bind address " + bind_);
    }
    listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const int one = 1;
    if (listen_fd_ >= 0) ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    const bool ok = listen_fd_ >= 0 && ::bind(listen_fd_, res->ai_addr, res->ai_addrlen) == 0 &&
                    ::listen(listen_fd_, 64) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
      if (listen_fd_ >= 0) ::close(listen_fd_);
      listen_fd_ = -1;
      throw Error(ErrorCode::kNetworkError,
                  "proxy: cannot listen on port " + port_text + ": " + std::strerror(errno));
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    const int bound = addr.ss_family == AF_INET6
                          ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                          : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    stopping_ = false;
    accept_thread_ = std::thread([this] { AcceptLoop(); });
    return bound;
  }

  void Stop() {
    if (!accept_thread_.joinable()) return;
    stopping_ = true;
    accept_thread_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::vector<Worker> workers;
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
      workers.swap(workers_);
    }
    for (Worker& w : workers) w.thread.join();
  }

 private:
  void AcceptLoop() {
    while (!stopping_) {
      pollfd p{listen_fd_, POLLIN, 0};
      if (::poll(&p, 1, kPollMillis) <= 0) continue;
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      std::lock_guard<std::mutex> lock(mu_);
      Reap();
      open_fds_.insert(fd);
      auto done = std::make_shared<std::atomic<bool>>(false);
      workers_.push_back({std::thread([this, fd, done] {
                            Serve(fd);
                            {
                              std::lock_guard<std::mutex> inner(mu_);
                              open_fds_.erase(fd);
                              ::close(fd);
                            }
                            *done = true;
                          }),
                          done});
    }
  }

  // Joins finished connection threads.  Requires mu_.
  void Reap() {
    for (auto it = workers_.begin(); it != workers_.end();) {
      if (*it->done) {
        it->thread.join();
        it = workers_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void Serve(int fd) {
    std::string head;
    char buf[8192];
    size_t end = std::string::npos;
    while ((end = head.find("\r\n\r\n")) == std::string::npos) {
      if (head.size() > kMaxRequestHead || !WaitReadable(fd)) return;
      const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
      if (n <= 0) return;
      head.append(buf, static_cast<size_t>(n));
    }
    const std::string leftover = head.substr(end + 4);
    std::istringstream line(head.substr(0, head.find("\r\n")));
    std::string method, target, version;
    line >> method >> target >> version;
    if (method == "CONNECT") {
      Tunnel(fd, target, leftover);
    } else if (method == "GET" || method == "HEAD") {
      if (target.rfind("http://", 0) != 0) {
        WriteSimple(fd, 400, ErrorJson("invalid_argument", "absolute http:// URL required"));
        return;
      }
      const ImageResponse r = service_->HandleProxied(target);
      std::ostringstream s;
      s << "HTTP/1.1 " << r.status << ' ' << Reason(r.status) << "\r\n"
        << "Content-Type: " << r.content_type << "\r\nContent-Length: " << r.body.size() << "\r\n";
      for (const auto& [k, v] : r.headers) s << k << ": " << v << "\r\n";
      s << "Connection: close\r\n\r\n";
      const std::string text = s.str();
      if (!WriteAll(fd, text.data(), text.size())) return;
      if (method == "GET") {
        WriteAll(fd, reinterpret_cast<const char*>(r.body.data()), r.body.size());
      }
    } else {
      WriteSimple(fd, 501, ErrorJson("invalid_argument", "method not supported by the proxy"));
    }
  }

  bool WaitReadable(int fd) {
    while (!stopping_) {
      pollfd p{fd, POLLIN, 0};
      const int n = ::poll(&p, 1, kPollMillis);
      if (n > 0) return true;
      if (n < 0 && errno != EINTR) return false;
    }
    return false;
  }

  void Tunnel(int client, const std::string& authority, const std::string& leftover) {
    std::string host, port;
    if (!SplitAuthority(authority, &host, &port)) {
      WriteSimple(client, 400, ErrorJson("invalid_argument", "CONNECT needs host:port"));
      return;
    }
    const int upstream = ConnectTo(host, port);
    if (upstream < 0) {
      WriteSimple(client, 502, ErrorJson("network_error", "cannot reach " + authority));
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      open_fds_.insert(upstream);
    }
    static constexpr std::string_view kEstablished = "HTTP/1.1 200 Connection Established\r\n\r\n";
    bool ok = WriteAll(client, kEstablished.data(), kEstablished.size()) &&
              WriteAll(upstream, leftover.data(), leftover.size());
    char buf[16384];
    while (ok && !stopping_) {
      pollfd p[2] = {{client, POLLIN, 0}, {upstream, POLLIN, 0}};
      const int n = ::poll(p, 2, kPollMillis);
      if (n < 0 && errno != EINTR) break;
      for (int i = 0; ok && i < 2; ++i) {
        if (!(p[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        const ssize_t r = ::recv(p[i].fd, buf, sizeof(buf), 0);
        ok = r > 0 && WriteAll(p[1 - i].fd, buf, static_cast<size_t>(r));
      }
    }
    std::lock_guard<std::mutex> lock(mu_);
    open_fds_.erase(upstream);
    ::close(upstream);
  }

  ImageService* service_;
  std::string bind_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::set<int> open_fds_;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::vector<Worker> workers_;
};

Gateway::Gateway(GatewayConfig config)
    : config_(std::move(config)) {
  config_.Validate();
  TransportOptions t;
  t.per_host_limit = config_.per_host_limit;
  owned_transport_ = MakeHttpTransport(t);
  transport_ = owned_transport_.get();
  if (!config_.ruleset_path.empty()) rules_ = RuleSet::Load(config_.ruleset_path);
  service_ = std::make_unique<ImageService>(config_, transport_, rules_ ? &*rules_ : nullptr,
                                            &stats_);
}

Gateway::Gateway(GatewayConfig config, HttpTransport* transport, std::optional<RuleSet> rules)
    : config_(std::move(config)), transport_(transport), rules_(std::move(rules)) {
  config_.Validate();
  service_ = std::make_unique<ImageService>(config_, transport_, rules_ ? &*rules_ : nullptr,
                                            &stats_);
}

Gateway::~Gateway() { Stop(); }

void Gateway::Start() {
  server_ = std::make_unique<httplib::Server>();
  server_->Get("/img", [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> params;
    for (const auto& [k, v] : req.params) params.emplace(k, v);
    ImageResponse r = service_->Handle(params);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(std::string(r.body.begin(), r.body.end()), r.content_type);
  });
  server_->Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(stats_.ToJson(), "application/json");
  });
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok\n", "text/plain");
  });
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.bind);
  } else {
    port_ = server_->bind_to_port(config_.bind, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) {
    server_.reset();
    throw Error(ErrorCode::kNetworkError,
                "cannot listen on " + config_.bind + ":" + std::to_string(config_.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  if (config_.forward_proxy) {
    proxy_ = std::make_unique<Proxy>(service_.get(), config_.bind);
    proxy_port_ = proxy_->Start(config_.proxy_port);
  }
}

void Gateway::Stop() {
  if (proxy_) proxy_->Stop();
  proxy_.reset();
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string Gateway::BaseUrl() const { return "http://" + config_.bind + ":" + std::to_string(port_); }

}  // namespace bytelite
