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

#include "iscflat/protocol/wire.hpp"

#include <array>
#include <stdexcept>

namespace iscflat::proto {

namespace {

constexpr std::array<std::string_view, 4> kDecodeErrorNames = {
    "Truncated", "BadVersion", "LengthMismatch", "Oversize"};

void put_u16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename C>
void put_bytes(Bytes& b, const C& c) {
  b.insert(b.end(), c.begin(), c.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t remaining() const { return b_.size() - pos_; }

  bool u8(std::uint8_t& v) {
    if (remaining() < 1) return false;
    v = b_[pos_++];
    return true;
  }
  bool u16(std::uint16_t& v) {
    if (remaining() < 2) return false;
    v = static_cast<std::uint16_t>(b_[pos_] | b_[pos_ + 1] << 8);
    pos_ += 2;
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (remaining() < 4) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return true;
  }
  template <std::size_t N>
  bool fixed(std::array<std::uint8_t, N>& out) {
    if (remaining() < N) return false;
    std::copy_n(b_.begin() + static_cast<std::ptrdiff_t>(pos_), N, out.begin());
    pos_ += N;
    return true;
  }
  void take(std::size_t n, Bytes& out) {
    out.assign(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
               b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

// Reads and checks the version byte.
std::optional<DecodeError> header(Reader& r, std::size_t size) {
  if (size > kMaxMessageBytes) return DecodeError::Oversize;
  std::uint8_t v = 0;
  if (!r.u8(v)) return DecodeError::Truncated;
  if (v != kWireVersion) return DecodeError::BadVersion;
  return std::nullopt;
}

}  // namespace

std::string_view decode_error_name(DecodeError e) {
  return kDecodeErrorNames[static_cast<std::size_t>(e)];
}

std::string_view error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Busy: return "Busy";
    case ErrorCode::Refused: return "Refused";
    case ErrorCode::Fault: return "Fault";
    case ErrorCode::NoReport: return "NoReport";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::UnknownApp: return "UnknownApp";
  }
  return "Unknown";
}

Bytes encode_request(const AttestationRequest& r) {
  Bytes b;
  b.push_back(kWireVersion);
  put_bytes(b, r.chl);
  put_bytes(b, r.app_id);
  return b;
}

Decoded<AttestationRequest> decode_request(std::span<const std::uint8_t> b) {
  Reader r(b);
  if (auto e = header(r, b.size())) return *e;
  AttestationRequest out;
  if (!r.fixed(out.chl) || !r.fixed(out.app_id)) return DecodeError::Truncated;
  if (r.remaining() != 0) return DecodeError::LengthMismatch;
  return out;
}

Bytes encode_report(const secure::Report& r) {
  if (r.sigma.size() > 0xFFFF) throw std::length_error("sigma too long");
  Bytes b;
  b.push_back(kWireVersion);
  put_u16(b, static_cast<std::uint16_t>(r.sigma.size()));
  put_bytes(b, r.sigma);
  put_u32(b, static_cast<std::uint32_t>(r.cflog.size()));
  for (vm::Word w : r.cflog) put_u32(b, w);
  put_bytes(b, r.h_app);
  put_bytes(b, r.chl);
  put_u32(b, static_cast<std::uint32_t>(r.out.size()));
  put_bytes(b, r.out);
  if (b.size() > kMaxMessageBytes) throw std::length_error("report too large");
  return b;
}

Decoded<secure::Report> decode_report(std::span<const std::uint8_t> b) {
  Reader r(b);
  if (auto e = header(r, b.size())) return *e;
  secure::Report out;
  std::uint16_t sigma_len = 0;
  if (!r.u16(sigma_len)) return DecodeError::Truncated;
  if (sigma_len > r.remaining()) return DecodeError::LengthMismatch;
  r.take(sigma_len, out.sigma);
  std::uint32_t count = 0;
  if (!r.u32(count)) return DecodeError::Truncated;
  if (static_cast<std::uint64_t>(count) * 4 > r.remaining()) {
    return DecodeError::LengthMismatch;
  }
  out.cflog.resize(count);
  for (auto& w : out.cflog) r.u32(w);
  if (!r.fixed(out.h_app) || !r.fixed(out.chl)) return DecodeError::Truncated;
  std::uint32_t out_len = 0;
  if (!r.u32(out_len)) return DecodeError::Truncated;
  if (out_len > r.remaining()) return DecodeError::LengthMismatch;
  r.take(out_len, out.out);
  if (r.remaining() != 0) return DecodeError::LengthMismatch;
  return out;
}

Bytes encode_error(const ErrorFrame& e) {
  if (e.text.size() > 0xFFFF) throw std::length_error("error text too long");
  Bytes b;
  b.push_back(kWireVersion);
  b.push_back(static_cast<std::uint8_t>(e.code));
  put_u16(b, static_cast<std::uint16_t>(e.text.size()));
  put_bytes(b, e.text);
  return b;
}

Decoded<ErrorFrame> decode_error(std::span<const std::uint8_t> b) {
  Reader r(b);
  if (auto e = header(r, b.size())) return *e;
  std::uint8_t code = 0;
  std::uint16_t len = 0;
  if (!r.u8(code) || !r.u16(len)) return DecodeError::Truncated;
  if (len > r.remaining()) return DecodeError::LengthMismatch;
  Bytes text;
  r.take(len, text);
  if (r.remaining() != 0) return DecodeError::LengthMismatch;
  ErrorFrame out;
  out.code = static_cast<ErrorCode>(code);
  out.text.assign(text.begin(), text.end());
  return out;
}

}  // namespace iscflat::proto
