// Copyright 2026 The iscflat-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Length-prefixed frames over a TCP byte stream:
//
//   len u32 (LE, counts type + payload) | type u8 | payload
//
// Payloads are the wire.hpp encodings.

#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "iscflat/protocol/wire.hpp"

namespace iscflat::proto {

enum class FrameType : std::uint8_t { Request = 1, Report = 2, Error = 3 };

struct Frame {
  FrameType type = FrameType::Error;
  Bytes payload;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// Parses "host:port" or a bare port. Throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& text);

// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int f = fd_;
    fd_ = -1;
    return f;
  }
  void close();

 private:
  int fd_ = -1;
};

using Millis = std::chrono::milliseconds;

Socket connect_tcp(const Endpoint& ep, Millis timeout);
// Binds and listens; port 0 picks an ephemeral port, reported in `bound`.
Socket listen_tcp(const Endpoint& ep, std::uint16_t& bound);

void write_frame(const Socket& s, const Frame& f, Millis timeout);
// Throws TimeoutError when nothing complete arrives within `timeout`, and
// TransportError on EOF, oversize frames or unknown frame types.
Frame read_frame(const Socket& s, Millis timeout);

}  // namespace iscflat::proto
