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

// Versioned binary wire formats. All integers are little-endian.
//
//   request  : version u8 | chl[32] | app_id[16]
//   report   : version u8 | sigma_len u16 | sigma | count u32 | count x u32
//              | h_app[32] | chl[32] | out_len u32 | out
//   error    : version u8 | code u8 | text_len u16 | text
//
// A fixed-size field cut short is Truncated; a length prefix larger than
// the bytes that remain, or bytes left over after the last field, is
// LengthMismatch. Buffers over kMaxMessageBytes are Oversize.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "iscflat/secure/report.hpp"

namespace iscflat::proto {

using secure::Bytes;

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kMaxMessageBytes = 64 * 1024;

enum class DecodeError : std::uint8_t {
  Truncated,
  BadVersion,
  LengthMismatch,
  Oversize,
};

std::string_view decode_error_name(DecodeError e);

template <typename T>
using Decoded = std::variant<T, DecodeError>;

struct AttestationRequest {
  secure::Challenge chl{};
  secure::AppId app_id{};

  friend bool operator==(const AttestationRequest&,
                         const AttestationRequest&) = default;
};

enum class ErrorCode : std::uint8_t {
  Busy = 1,
  Refused = 2,
  Fault = 3,
  NoReport = 4,
  BadRequest = 5,
  UnknownApp = 6,
};

std::string_view error_code_name(ErrorCode c);

struct ErrorFrame {
  ErrorCode code = ErrorCode::NoReport;
  std::string text;

  friend bool operator==(const ErrorFrame&, const ErrorFrame&) = default;
};

// Encoders throw std::length_error when a field exceeds its bound.
Bytes encode_request(const AttestationRequest& r);
Decoded<AttestationRequest> decode_request(std::span<const std::uint8_t> b);
Bytes encode_report(const secure::Report& r);
Decoded<secure::Report> decode_report(std::span<const std::uint8_t> b);
Bytes encode_error(const ErrorFrame& e);
Decoded<ErrorFrame> decode_error(std::span<const std::uint8_t> b);

}  // namespace iscflat::proto
