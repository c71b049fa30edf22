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

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

namespace privedge::net {

using Clock = std::chrono::steady_clock;

// Reliable ordered byte stream. read_exact throws kChannel on timeout or when
// the peer closed before `out` could be filled.
class Stream {
 public:
  virtual ~Stream() = default;
  virtual void write(std::span<const std::uint8_t> data) = 0;
  virtual void read_exact(std::span<std::uint8_t> out,
                          Clock::time_point deadline) = 0;
  // Closes both directions; blocked readers on either end wake up.
  virtual void close() = 0;
};

// In-process duplex pipe.
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe_pair();

// TCP client connection to "host:port". Retries until `timeout` elapses.
std::unique_ptr<Stream> tcp_connect(const std::string& address,
                                    std::chrono::milliseconds timeout);

class TcpListener {
 public:
  explicit TcpListener(const std::string& address);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  // Blocks until a client connects.
  std::unique_ptr<Stream> accept();
  std::uint16_t port() const { return port_; }
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace privedge::net
