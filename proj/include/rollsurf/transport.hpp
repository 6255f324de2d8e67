#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rollsurf/rng.hpp"

namespace rollsurf {

// Knobs of the simulated control link. Latency and jitter are real delays
// on the socket path; command loss drops outbound messages before they hit
// the wire, which is what exercises the retry path.
struct TransportOptions {
  double latency_ms = 0.0;
  double jitter_ms = 0.0;
  double command_loss_probability = 0.0;
  std::uint64_t loss_seed = 0;
  int port = 0;                 // loopback socket; 0 picks an ephemeral port
  std::string capture_path;     // when set, all traffic is dumped here
};

// Server's side of the control link. Lines are whole wire records.
class ServerLink {
 public:
  virtual ~ServerLink() = default;
  virtual void send_line(const std::string& line) = 0;
  virtual std::optional<std::string> receive_line(
      std::chrono::milliseconds timeout) = 0;
};

namespace detail {

class CaptureFile {
 public:
  explicit CaptureFile(const std::string& path) {
    if (!path.empty()) {
      out_.open(path, std::ios::binary | std::ios::app);
      if (!out_) throw std::runtime_error("cannot open capture file: " + path);
    }
  }
  void log(char direction, const std::string& line) {
    if (!out_.is_open()) return;
    out_ << direction << ' ' << line;
    if (line.empty() || line.back() != '\n') out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace detail

// Zero-latency reference transport: the remote cluster is invoked as a
// function call, its replies land in the inbox. An empty inbox means
// nothing more can arrive, so receive never blocks.
class InprocLink : public ServerLink {
 public:
  using RemoteFn = std::function<std::vector<std::string>(const std::string&)>;

  InprocLink(RemoteFn remote, TransportOptions options = {})
      : remote_(std::move(remote)),
        options_(options),
        loss_rng_(mix_seed(options.loss_seed, "cmd-loss")),
        capture_(options.capture_path) {}

  void seed_inbox(const std::vector<std::string>& lines) {
    for (const auto& l : lines) {
      capture_.log('<', l);
      inbox_.push_back(l);
    }
  }

  void send_line(const std::string& line) override {
    capture_.log('>', line);
    if (options_.command_loss_probability > 0.0 &&
        loss_rng_.uniform01() < options_.command_loss_probability)
      return;  // dropped on the floor
    for (auto& reply : remote_(line)) {
      capture_.log('<', reply);
      inbox_.push_back(std::move(reply));
    }
  }

  std::optional<std::string> receive_line(std::chrono::milliseconds) override {
    if (inbox_.empty()) return std::nullopt;
    std::string line = std::move(inbox_.front());
    inbox_.pop_front();
    return line;
  }

 private:
  RemoteFn remote_;
  TransportOptions options_;
  SeededRng loss_rng_;
  detail::CaptureFile capture_;
  std::deque<std::string> inbox_;
};

// Client half of the loopback TCP transport.
class SocketLink : public ServerLink {
 public:
  SocketLink(int port, TransportOptions options = {})
      : options_(options),
        loss_rng_(mix_seed(options.loss_seed, "cmd-loss")),
        jitter_rng_(mix_seed(options.loss_seed, "jitter")),
        capture_(options.capture_path) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd_);
      throw std::runtime_error("connect() to loopback port " +
                               std::to_string(port) + " failed");
    }
  }

  ~SocketLink() override {
    if (fd_ >= 0) ::close(fd_);
  }

  SocketLink(const SocketLink&) = delete;
  SocketLink& operator=(const SocketLink&) = delete;

  void send_line(const std::string& line) override {
    capture_.log('>', line);
    if (options_.command_loss_probability > 0.0 &&
        loss_rng_.uniform01() < options_.command_loss_probability)
      return;
    if (options_.latency_ms > 0.0 || options_.jitter_ms > 0.0) {
      const double delay =
          options_.latency_ms + options_.jitter_ms * jitter_rng_.uniform01();
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
    }
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, 0);
      if (n <= 0) throw std::runtime_error("send() failed");
      sent += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> receive_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl + 1);
        buffer_.erase(0, nl + 1);
        capture_.log('<', line);
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      pollfd pfd{fd_, POLLIN, 0};
      const int wait_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
              .count());
      const int r = ::poll(&pfd, 1, std::max(wait_ms, 1));
      if (r < 0) throw std::runtime_error("poll() failed");
      if (r == 0) return std::nullopt;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) throw std::runtime_error("control connection closed");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  TransportOptions options_;
  SeededRng loss_rng_;
  SeededRng jitter_rng_;
  detail::CaptureFile capture_;
  int fd_ = -1;
  std::string buffer_;
};

// Remote half of the loopback transport: accepts one connection and
// services it with the supplied handler on a dedicated thread.
class SocketHost {
 public:
  using Handler = std::function<std::vector<std::string>(const std::string&)>;

  SocketHost(Handler handler, std::vector<std::string> greeting,
             int port = 0)
      : handler_(std::move(handler)), greeting_(std::move(greeting)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(listen_fd_);
      throw std::runtime_error("bind() on loopback port " + std::to_string(port) +
                               " failed");
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    if (::listen(listen_fd_, 1) != 0) {
      ::close(listen_fd_);
      throw std::runtime_error("listen() failed");
    }
    thread_ = std::thread([this] { serve(); });
  }

  ~SocketHost() {
    stop();
    if (thread_.joinable()) thread_.join();
  }

  SocketHost(const SocketHost&) = delete;
  SocketHost& operator=(const SocketHost&) = delete;

  int port() const { return port_; }

  void stop() {
    if (listen_fd_ >= 0) {
      ::shutdown(listen_fd_, SHUT_RDWR);
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
  }

 private:
  void serve() {
    const int conn = ::accept(listen_fd_, nullptr, nullptr);
    if (conn < 0) return;  // host stopped before anyone connected
    const auto write_all = [conn](const std::string& line) {
      std::size_t sent = 0;
      while (sent < line.size()) {
        const ssize_t n = ::send(conn, line.data() + sent, line.size() - sent, 0);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
      }
      return true;
    };
    bool alive = true;
    for (const auto& line : greeting_)
      if (!write_all(line)) alive = false;
    std::string buffer;
    char chunk[4096];
    while (alive) {
      const ssize_t n = ::recv(conn, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while (alive && (nl = buffer.find('\n')) != std::string::npos) {
        const std::string line = buffer.substr(0, nl + 1);
        buffer.erase(0, nl + 1);
        for (const auto& reply : handler_(line))
          if (!write_all(reply)) alive = false;
      }
    }
    ::close(conn);
  }

  Handler handler_;
  std::vector<std::string> greeting_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace rollsurf
