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

#include "iscflat/protocol/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace iscflat::proto {

namespace {

using Clock = std::chrono::steady_clock;

std::string sys_error(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

sockaddr_in make_addr(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
    throw TransportError("not an IPv4 address: " + ep.host);
  }
  return addr;
}

// Waits for `events` on fd until `deadline`.
void wait_for(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    const auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
    if (left.count() <= 0) throw TimeoutError("timed out");
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc > 0) return;
    if (rc < 0 && errno != EINTR) throw TransportError(sys_error("poll"));
  }
}

void recv_exact(int fd, std::uint8_t* dst, std::size_t n,
                Clock::time_point deadline) {
  while (n > 0) {
    wait_for(fd, POLLIN, deadline);
    const ssize_t got = ::recv(fd, dst, n, 0);
    if (got == 0) throw TransportError("connection closed by peer");
    if (got < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(sys_error("recv"));
    }
    dst += got;
    n -= static_cast<std::size_t>(got);
  }
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  std::string port = text;
  if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    ep.host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(port, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad endpoint: " + text);
  }
  if (used != port.size() || v > 0xFFFF || ep.host.empty()) {
    throw std::invalid_argument("bad endpoint: " + text);
  }
  ep.port = static_cast<std::uint16_t>(v);
  return ep;
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

Socket connect_tcp(const Endpoint& ep, Millis timeout) {
  const sockaddr_in addr = make_addr(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw TransportError(sys_error("socket"));
  // Send/receive timeouts bound a stuck connect as well.
  timeval tv{static_cast<time_t>(timeout.count() / 1000),
             static_cast<suseconds_t>(timeout.count() % 1000 * 1000)};
  ::setsockopt(s.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    throw TransportError(sys_error("connect"));
  }
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

Socket listen_tcp(const Endpoint& ep, std::uint16_t& bound) {
  const sockaddr_in addr = make_addr(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw TransportError(sys_error("socket"));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    throw TransportError(sys_error("bind"));
  }
  if (::listen(s.fd(), 16) != 0) throw TransportError(sys_error("listen"));
  sockaddr_in actual{};
  socklen_t len = sizeof actual;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&actual), &len);
  bound = ntohs(actual.sin_port);
  return s;
}

void write_frame(const Socket& s, const Frame& f, Millis timeout) {
  if (f.payload.size() > kMaxMessageBytes) throw TransportError("frame too large");
  Bytes buf;
  const auto len = static_cast<std::uint32_t>(f.payload.size() + 1);
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  buf.push_back(static_cast<std::uint8_t>(f.type));
  buf.insert(buf.end(), f.payload.begin(), f.payload.end());

  const auto deadline = Clock::now() + timeout;
  std::size_t sent = 0;
  while (sent < buf.size()) {
    wait_for(s.fd(), POLLOUT, deadline);
    const ssize_t n = ::send(s.fd(), buf.data() + sent, buf.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(sys_error("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

Frame read_frame(const Socket& s, Millis timeout) {
  const auto deadline = Clock::now() + timeout;
  std::uint8_t head[5];
  recv_exact(s.fd(), head, sizeof head, deadline);
  const std::uint32_t len = static_cast<std::uint32_t>(head[0]) |
                            static_cast<std::uint32_t>(head[1]) << 8 |
                            static_cast<std::uint32_t>(head[2]) << 16 |
                            static_cast<std::uint32_t>(head[3]) << 24;
  if (len == 0 || len - 1 > kMaxMessageBytes) {
    throw TransportError("bad frame length " + std::to_string(len));
  }
  if (head[4] < 1 || head[4] > 3) {
    throw TransportError("unknown frame type " + std::to_string(head[4]));
  }
  Frame f;
  f.type = static_cast<FrameType>(head[4]);
  f.payload.resize(len - 1);
  recv_exact(s.fd(), f.payload.data(), f.payload.size(), deadline);
  return f;
}

}  // namespace iscflat::proto
