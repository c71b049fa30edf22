// Copyright 2026 The PrivEdge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privedge/net/stream.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include "privedge/error.hpp"

namespace privedge::net {
namespace {

struct Lane {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> chunks;
  std::size_t front_offset = 0;
  bool closed = false;
};

struct PipeShared {
  Lane lanes[2];

  void close_all() {
    for (auto& lane : lanes) {
      std::lock_guard lock(lane.mu);
      lane.closed = true;
      lane.cv.notify_all();
    }
  }
};

class PipeStream final : public Stream {
 public:
  PipeStream(std::shared_ptr<PipeShared> shared, int side)
      : shared_(std::move(shared)), side_(side) {}
  ~PipeStream() override { close(); }

  void write(std::span<const std::uint8_t> data) override {
    Lane& lane = shared_->lanes[side_];
    std::lock_guard lock(lane.mu);
    if (lane.closed) fail(ErrorKind::kChannel, "pipe closed");
    lane.chunks.emplace_back(data.begin(), data.end());
    lane.cv.notify_all();
  }

  void read_exact(std::span<std::uint8_t> out,
                  Clock::time_point deadline) override {
    Lane& lane = shared_->lanes[1 - side_];
    std::unique_lock lock(lane.mu);
    std::size_t done = 0;
    while (done < out.size()) {
      if (!lane.cv.wait_until(lock, deadline, [&] {
            return !lane.chunks.empty() || lane.closed;
          })) {
        fail(ErrorKind::kChannel, "receive timed out");
      }
      if (lane.chunks.empty()) fail(ErrorKind::kChannel, "peer closed the pipe");
      const auto& front = lane.chunks.front();
      const std::size_t n =
          std::min(out.size() - done, front.size() - lane.front_offset);
      std::memcpy(out.data() + done, front.data() + lane.front_offset, n);
      lane.front_offset += n;
      done += n;
      if (lane.front_offset == front.size()) {
        lane.chunks.pop_front();
        lane.front_offset = 0;
      }
    }
  }

  void close() override { shared_->close_all(); }

 private:
  std::shared_ptr<PipeShared> shared_;
  int side_;
};

std::pair<std::string, std::string> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) {
    fail(ErrorKind::kUsage, "address must be host:port, got '" + address + "'");
  }
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  return {host, address.substr(colon + 1)};
}

class TcpStream final : public Stream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpStream() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void write(std::span<const std::uint8_t> data) override {
    std::size_t done = 0;
    while (done < data.size()) {
      const auto n = ::send(fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(ErrorKind::kChannel, std::string("send failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::span<std::uint8_t> out,
                  Clock::time_point deadline) override {
    std::size_t done = 0;
    while (done < out.size()) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (left.count() <= 0) fail(ErrorKind::kChannel, "receive timed out");
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        fail(ErrorKind::kChannel, std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      const auto n = ::recv(fd_, out.data() + done, out.size() - done, 0);
      if (n == 0) fail(ErrorKind::kChannel, "peer closed the connection");
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        fail(ErrorKind::kChannel, std::string("recv failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  void close() override {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_;
};

addrinfo* resolve(const std::string& host, const std::string& port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) fail(ErrorKind::kChannel, "cannot resolve " + host + ":" + port);
  return res;
}

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe_pair() {
  auto shared = std::make_shared<PipeShared>();
  return {std::make_unique<PipeStream>(shared, 0),
          std::make_unique<PipeStream>(shared, 1)};
}

std::unique_ptr<Stream> tcp_connect(const std::string& address,
                                    std::chrono::milliseconds timeout) {
  const auto [host, port] = split_address(address);
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    addrinfo* res = resolve(host, port, false);
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
      ::freeaddrinfo(res);
      fail(ErrorKind::kChannel, "socket() failed");
    }
    const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc == 0) return std::make_unique<TcpStream>(fd);
    ::close(fd);
    if (Clock::now() >= deadline) {
      fail(ErrorKind::kChannel, "cannot connect to " + address);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

TcpListener::TcpListener(const std::string& address) {
  const auto [host, port] = split_address(address);
  addrinfo* res = resolve(host, port, true);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const bool ok = fd_ >= 0 && ::bind(fd_, res->ai_addr, res->ai_addrlen) == 0 &&
                  ::listen(fd_, 64) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    const std::string err = std::strerror(errno);
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::kChannel, "cannot listen on " + address + ": " + err);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpListener::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::unique_ptr<Stream> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpStream>(fd);
    if (errno == EINTR) continue;
    fail(ErrorKind::kChannel, std::string("accept failed: ") + std::strerror(errno));
  }
}

}  // namespace privedge::net
