#pragma once

#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include "otp/common.hpp"

namespace otp::wire {

class Duplex {
 public:
  virtual ~Duplex() = default;
  virtual void send(std::span<const std::uint8_t> bytes) = 0;
  // Blocks for at least one byte; returns 0 only on orderly shutdown.
  virtual std::size_t recv(std::span<std::uint8_t> out) = 0;
  virtual void close() = 0;
};

namespace detail {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> data;
  bool closed = false;

  void write(std::span<const std::uint8_t> bytes) {
    {
      std::lock_guard lk(mu);
      if (closed) fail(Errc::io, "pipe closed");
      data.insert(data.end(), bytes.begin(), bytes.end());
    }
    cv.notify_all();
  }

  std::size_t read(std::span<std::uint8_t> out) {
    std::unique_lock lk(mu);
    cv.wait(lk, [&] { return !data.empty() || closed; });
    if (data.empty()) return 0;
    const std::size_t n = std::min(out.size(), data.size());
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = data.front();
      data.pop_front();
    }
    return n;
  }

  void close() {
    {
      std::lock_guard lk(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

}  // namespace detail

// Two ends backed by in-process queues; safe across threads.
class MemoryDuplex : public Duplex {
 public:
  MemoryDuplex(std::shared_ptr<detail::Pipe> out, std::shared_ptr<detail::Pipe> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  void send(std::span<const std::uint8_t> bytes) override { out_->write(bytes); }
  std::size_t recv(std::span<std::uint8_t> out) override { return in_->read(out); }
  void close() override {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<detail::Pipe> out_;
  std::shared_ptr<detail::Pipe> in_;
};

inline std::pair<std::unique_ptr<Duplex>, std::unique_ptr<Duplex>> memory_pair() {
  auto a2b = std::make_shared<detail::Pipe>();
  auto b2a = std::make_shared<detail::Pipe>();
  return {std::make_unique<MemoryDuplex>(a2b, b2a), std::make_unique<MemoryDuplex>(b2a, a2b)};
}

class TcpDuplex : public Duplex {
 public:
  explicit TcpDuplex(int fd) : fd_(fd) {}
  TcpDuplex(const TcpDuplex&) = delete;
  TcpDuplex& operator=(const TcpDuplex&) = delete;
  ~TcpDuplex() override { close(); }

  void send(std::span<const std::uint8_t> bytes) override {
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n <= 0) fail(Errc::io, "socket send failed");
      off += static_cast<std::size_t>(n);
    }
  }

  std::size_t recv(std::span<std::uint8_t> out) override {
    const ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
    if (n < 0) fail(Errc::io, "socket recv failed");
    return static_cast<std::size_t>(n);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail(Errc::io, "socket failed");
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd_);
      fail(Errc::io, "bind failed");
    }
    if (::listen(fd_, 4) != 0) {
      ::close(fd_);
      fail(Errc::io, "listen failed");
    }
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }

  std::uint16_t port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
      fail(Errc::io, "getsockname failed");
    return ntohs(addr.sin_port);
  }

  std::unique_ptr<Duplex> accept() {
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c < 0) fail(Errc::io, "accept failed");
    const int one = 1;
    ::setsockopt(c, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return std::make_unique<TcpDuplex>(c);
  }

 private:
  int fd_;
};

inline std::unique_ptr<Duplex> tcp_connect(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail(Errc::io, "socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    fail(Errc::invalid_argument, "bad IPv4 address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    fail(Errc::io, "connect to " + host + " failed");
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<TcpDuplex>(fd);
}

// Deterministic cost model for a run: frames alternate directions, so the
// session charges one latency per direction switch plus serialization time.
struct TimingModel {
  double latency_ms = 0;
  double bandwidth_mbit = 0;  // 0 = infinite

  double cost_ms(std::uint64_t direction_switches, std::uint64_t total_bytes) const {
    double ms = latency_ms * static_cast<double>(direction_switches);
    if (bandwidth_mbit > 0)
      ms += static_cast<double>(total_bytes) * 8.0 / (bandwidth_mbit * 1000.0);
    return ms;
  }
};

}  // namespace otp::wire
