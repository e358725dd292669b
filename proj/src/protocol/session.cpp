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

#include "iscflat/protocol/session.hpp"

#include <poll.h>
#include <sys/socket.h>

#include <chrono>

namespace iscflat::proto {

namespace {

using Clock = std::chrono::steady_clock;

constexpr Millis kIoTimeout{5'000};

Frame error_frame(ErrorCode code, std::string text) {
  return {FrameType::Error, encode_error({code, std::move(text)})};
}

}  // namespace

ProverServer::ProverServer(std::map<secure::AppId, harness::Device*> devices,
                           ProverConfig config)
    : devices_(std::move(devices)), config_(std::move(config)) {
  if (config_.chunk == 0) config_.chunk = 1;
  if (config_.ips > 0) {
    // Keep pacing granular: at most ~10 ms of simulated work per chunk.
    config_.chunk = std::max<std::uint64_t>(
        1, std::min(config_.chunk, config_.ips / 100));
  }
}

ProverServer::~ProverServer() { stop(); }

std::uint16_t ProverServer::start() {
  std::uint16_t port = 0;
  listener_ = listen_tcp(config_.listen, port);
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port;
}

void ProverServer::stop() {
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> conns;
  {
    std::lock_guard lock(conns_mu_);
    conns.swap(conns_);
  }
  for (auto& t : conns) t.join();
  listener_.close();
}

void ProverServer::wait() {
  while (!stopping_) std::this_thread::sleep_for(Millis{100});
}

ProverStats ProverServer::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

void ProverServer::accept_loop() {
  while (!stopping_) {
    pollfd p{listener_.fd(), POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    Socket conn(::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!conn.valid()) continue;
    std::lock_guard lock(conns_mu_);
    conns_.emplace_back(
        [this, c = std::move(conn)]() mutable { handle(std::move(c)); });
  }
}

void ProverServer::handle(Socket conn) {
  try {
    const Frame in = read_frame(conn, kIoTimeout);
    Frame out;
    if (in.type != FrameType::Request) {
      out = error_frame(ErrorCode::BadRequest, "expected a request frame");
    } else {
      auto req = decode_request(in.payload);
      if (auto* e = std::get_if<DecodeError>(&req)) {
        out = error_frame(ErrorCode::BadRequest,
                          "undecodable request: " +
                              std::string(decode_error_name(*e)));
      } else {
        out = serve_request(std::get<AttestationRequest>(req));
      }
    }
    write_frame(conn, out, kIoTimeout);
  } catch (const TransportError&) {
    // The peer went away; any session it started has already completed.
  }
}

bool ProverServer::any_active() const {
  for (const auto& [id, dev] : devices_) {
    if (dev->runtime().instance().active) return true;
  }
  return false;
}

Frame ProverServer::serve_request(const AttestationRequest& req) {
  {
    std::lock_guard lock(stats_mu_);
    ++stats_.sessions;
  }
  const auto count = [this](bool report) {
    std::lock_guard lock(stats_mu_);
    ++(report ? stats_.reports : stats_.errors);
  };

  harness::Device* dev = nullptr;
  {
    std::lock_guard lock(device_mu_);
    if (any_active()) {
      count(false);
      return error_frame(ErrorCode::Busy, "attestation in progress");
    }
    const auto it = devices_.find(req.app_id);
    if (it == devices_.end()) {
      count(false);
      return error_frame(ErrorCode::UnknownApp, "unknown app_id");
    }
    dev = it->second;
    const secure::InitStatus st = dev->begin(req.chl);
    if (st == secure::InitStatus::Busy) {
      count(false);
      return error_frame(ErrorCode::Busy, "attestation in progress");
    }
    if (st == secure::InitStatus::UnknownApp) {
      count(false);
      return error_frame(ErrorCode::UnknownApp, "unknown app_id");
    }
  }

  const auto t0 = Clock::now();
  std::uint64_t done = 0;
  std::optional<harness::AttestOutcome> outcome;
  while (!outcome) {
    const std::uint64_t n =
        std::min(config_.chunk, config_.max_instructions - done);
    {
      std::lock_guard lock(device_mu_);
      outcome = dev->advance(n, false);
      done += n;
      if (!outcome && (done >= config_.max_instructions ||
                       Clock::now() - t0 >= config_.timeout || stopping_)) {
        outcome = dev->abandon(harness::AttestStatus::Timeout,
                               "no report after " + std::to_string(done) +
                                   " instructions");
      }
    }
    if (!outcome && config_.ips > 0) {
      const auto due = t0 + std::chrono::microseconds(done * 1'000'000 /
                                                      config_.ips);
      std::this_thread::sleep_until(due);
    }
  }

  switch (outcome->status) {
    case harness::AttestStatus::Reported:
      count(true);
      return {FrameType::Report, encode_report(*outcome->report)};
    case harness::AttestStatus::Refused:
      count(false);
      return error_frame(ErrorCode::Refused, outcome->detail);
    case harness::AttestStatus::Faulted:
      count(false);
      return error_frame(ErrorCode::Fault, outcome->detail);
    case harness::AttestStatus::Busy:
      count(false);
      return error_frame(ErrorCode::Busy, outcome->detail);
    case harness::AttestStatus::UnknownApp:
      count(false);
      return error_frame(ErrorCode::UnknownApp, outcome->detail);
    case harness::AttestStatus::Timeout:
      break;
  }
  count(false);
  return error_frame(ErrorCode::NoReport, outcome->detail);
}

std::string SessionResult::outcome() const {
  if (verdict) return std::string(verify::outcome_name(verdict->outcome));
  if (error && error->code == ErrorCode::Busy) return "Busy";
  return "NoReport";
}

Frame exchange(const Endpoint& ep, const AttestationRequest& req,
               Millis timeout) {
  Socket s = connect_tcp(ep, timeout);
  write_frame(s, {FrameType::Request, encode_request(req)}, timeout);
  return read_frame(s, timeout);
}

verify::Verdict adjudicate(const secure::Report& report,
                           const secure::Challenge& issued,
                           const verify::VerificationPolicy& policy) {
  verify::Verdict v = verify_report(report, policy);
  if (v.outcome == verify::Outcome::Accept && report.chl != issued) {
    v.outcome = verify::Outcome::RejectStale;
    v.detail = "report answers a different challenge";
  }
  return v;
}

SessionResult verifier_request(const Endpoint& ep,
                               const verify::VerificationPolicy& policy,
                               const secure::AppId& app_id, Rng& rng,
                               Millis timeout) {
  SessionResult res;
  rng.fill(res.chl);
  policy.nonces->issue(res.chl);
  const Frame f = exchange(ep, {res.chl, app_id}, timeout);
  switch (f.type) {
    case FrameType::Report: {
      auto rep = decode_report(f.payload);
      if (auto* e = std::get_if<DecodeError>(&rep)) {
        res.error = ErrorFrame{ErrorCode::NoReport,
                               "malformed report: " +
                                   std::string(decode_error_name(*e))};
        return res;
      }
      res.report_bytes = f.payload;
      res.report = std::get<secure::Report>(std::move(rep));
      res.verdict = adjudicate(*res.report, res.chl, policy);
      return res;
    }
    case FrameType::Error: {
      auto err = decode_error(f.payload);
      if (auto* e = std::get_if<ErrorFrame>(&err)) {
        res.error = std::move(*e);
      } else {
        res.error = ErrorFrame{ErrorCode::NoReport, "malformed error frame"};
      }
      return res;
    }
    case FrameType::Request:
      break;
  }
  throw TransportError("prover answered with a request frame");
}

}  // namespace iscflat::proto
