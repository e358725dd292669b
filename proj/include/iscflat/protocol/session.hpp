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

// Prover endpoint and verifier client.
//
// The prover accepts connections concurrently but drives at most one
// attestation at a time: a request that arrives while any App is being
// attested gets a Busy error frame. The device lock is held per execution
// chunk, never across a whole session, so such requests are answered
// promptly.

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "iscflat/harness/device.hpp"
#include "iscflat/protocol/transport.hpp"
#include "iscflat/util/random.hpp"
#include "iscflat/verifier/verifier.hpp"

namespace iscflat::proto {

struct ProverConfig {
  Endpoint listen;
  Millis timeout{10'000};
  std::uint64_t max_instructions = 10'000'000;
  // Simulated instructions per wall-clock second; 0 runs unthrottled.
  std::uint64_t ips = 0;
  std::uint64_t chunk = 4096;
};

struct ProverStats {
  std::uint64_t sessions = 0;
  std::uint64_t reports = 0;
  std::uint64_t errors = 0;
};

class ProverServer {
 public:
  // Devices are borrowed and must outlive the server.
  ProverServer(std::map<secure::AppId, harness::Device*> devices,
               ProverConfig config);
  ~ProverServer();
  ProverServer(const ProverServer&) = delete;
  ProverServer& operator=(const ProverServer&) = delete;

  // Binds and starts accepting; returns the bound port.
  std::uint16_t start();
  // Stops accepting, abandons a running session and joins every thread.
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

  ProverStats stats() const;

  // One session over an already-decoded request; exposed for tests.
  Frame serve_request(const AttestationRequest& req);

 private:
  void accept_loop();
  void handle(Socket conn);
  bool any_active() const;

  std::map<secure::AppId, harness::Device*> devices_;
  ProverConfig config_;
  Socket listener_;
  std::thread acceptor_;
  std::mutex conns_mu_;
  std::vector<std::thread> conns_;
  std::atomic<bool> stopping_{false};
  mutable std::mutex device_mu_;
  mutable std::mutex stats_mu_;
  ProverStats stats_;
};

struct SessionResult {
  secure::Challenge chl{};
  std::optional<verify::Verdict> verdict;  // a report arrived
  std::optional<ErrorFrame> error;         // the prover sent no report
  std::optional<secure::Report> report;
  Bytes report_bytes;

  bool accepted() const {
    return verdict && verdict->outcome == verify::Outcome::Accept;
  }
  // Verdict outcome name, "Busy" for a Busy frame, else "NoReport".
  std::string outcome() const;
};

// Sends `req` and returns the raw response frame.
Frame exchange(const Endpoint& ep, const AttestationRequest& req,
               Millis timeout);

// Draws a fresh challenge from `rng`, records it in policy.nonces, runs one
// session and verifies the report. A report whose challenge is not the one
// just issued is stale. Throws TimeoutError / TransportError.
SessionResult verifier_request(const Endpoint& ep,
                               const verify::VerificationPolicy& policy,
                               const secure::AppId& app_id, Rng& rng,
                               Millis timeout = Millis{15'000});

// Verifies an already-received report and classifies a challenge mismatch
// against `issued` as stale.
verify::Verdict adjudicate(const secure::Report& report,
                           const secure::Challenge& issued,
                           const verify::VerificationPolicy& policy);

}  // namespace iscflat::proto
