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

// iscflat: command-line front end.
//
// Exit codes: 0 success / Accept / full corpus pass, 1 verification or
// attack failure, 2 usage or input error.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "iscflat/harness/batch.hpp"
#include "iscflat/protocol/session.hpp"
#include "iscflat/util/errors.hpp"
#include "iscflat/util/hex.hpp"
#include "iscflat/vm/assembler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iscflat;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// Input problems that map to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json = false;
  std::optional<std::uint64_t> seed;
};

std::string hex_word(vm::Word w) {
  std::ostringstream os;
  os << "0x" << std::hex << w;
  return os.str();
}

secure::Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const fs::path& p, const secure::Bytes& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw InputError("cannot write " + p.string());
}

template <std::size_t N>
std::array<std::uint8_t, N> parse_hex_array(const std::string& text, const char* what) {
  const auto bytes = from_hex(text);
  if (!bytes || bytes->size() != N) {
    throw InputError(std::string(what) + " must be " + std::to_string(2 * N) + " hex digits");
  }
  std::array<std::uint8_t, N> out{};
  std::copy(bytes->begin(), bytes->end(), out.begin());
  return out;
}

vm::Program load_program(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("no such file: " + p.string());
  try {
    if (p.extension() == ".s" || p.extension() == ".asm") {
      return vm::assemble_file(p, vm::mem::kAppCodeBase);
    }
    return vm::load_image(p);
  } catch (const MalformedProgram& e) {
    throw InputError(e.what());
  }
}

harness::Scenario load_scenario_input(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("no such file: " + p.string());
  try {
    return harness::load_scenario(p);
  } catch (const HarnessError& e) {
    throw InputError(e.what());
  }
}

// ---- instrument -----------------------------------------------------------

struct InstrumentArgs {
  std::string in, out, cfg_out;
};

int cmd_instrument(const Globals& g, const InstrumentArgs& a) {
  const vm::Program prog = load_program(a.in);
  const cfg::ControlFlowGraph graph = cfg::extract_cfg(prog);
  const cfg::InstrumentedProgram ip = cfg::instrument(prog, graph);
  const fs::path cfg_path =
      a.cfg_out.empty() ? fs::path(a.out).replace_extension(".cfg") : fs::path(a.cfg_out);
  vm::save_image(ip.program, a.out);
  {
    std::ofstream os(cfg_path);
    if (!os) throw InputError("cannot write " + cfg_path.string());
    cfg::write_cfg(os, graph);
  }
  const auto plural = [](std::size_t n, const char* one, const char* many) {
    return std::to_string(n) + " " + (n == 1 ? one : many);
  };
  if (g.json) {
    std::cout << json{{"nodes", graph.nodes.size()},
                      {"edges", graph.edges.size()},
                      {"inserted", ip.inserted},
                      {"image", a.out},
                      {"cfg", cfg_path.string()},
                      {"h_app", to_hex(secure::blake2s(ip.program.bytes()))}}
              << "\n";
  } else {
    std::cout << plural(graph.nodes.size(), "node", "nodes") << ", "
              << plural(graph.edges.size(), "edge", "edges") << ", "
              << ip.inserted << " inserted\n";
  }
  return kOk;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  bool trace = false;
};

json result_json(const harness::ScenarioResult& r) {
  json j{{"name", r.name},
         {"mode", std::string(harness::mode_name(r.mode))},
         {"expected", harness::outcome_text(r.expected)},
         {"actual", harness::outcome_text(r.actual)},
         {"passed", r.passed},
         {"detail", r.detail}};
  if (r.report) {
    json log = json::array();
    for (auto w : r.report->cflog) log.push_back(hex_word(w));
    j["cflog"] = log;
    j["log_digest"] = to_hex(secure::blake2s(secure::cflog_bytes(r.report->cflog)));
  }
  return j;
}

int cmd_run(const Globals& g, const RunArgs& a) {
  const harness::Scenario sc = load_scenario_input(a.scenario);
  const harness::ScenarioResult r = harness::run_scenario(sc, g.seed.value_or(1));
  if (g.json) {
    json j = result_json(r);
    if (a.trace) {
      std::ostringstream os;
      vm::write_trace(os, r.trace);
      j["trace"] = os.str();
    }
    std::cout << j.dump(2) << "\n";
  } else {
    if (a.trace) vm::write_trace(std::cout, r.trace);
    std::cout << r.name << " [" << harness::mode_name(r.mode) << "]: "
              << harness::outcome_text(r.actual) << " (" << r.detail << ")\n";
    if (r.report) {
      std::cout << "cflog:";
      for (auto w : r.report->cflog) std::cout << " " << hex_word(w);
      std::cout << "\n";
    }
  }
  return r.passed ? kOk : kFail;
}

// ---- keygen ---------------------------------------------------------------

struct KeygenArgs {
  std::string out;
  bool force = false;
};

int cmd_keygen(const Globals& g, const KeygenArgs& a) {
  const fs::path sk = a.out + ".sk";
  const fs::path pk = a.out + ".pk";
  if (!a.force && (fs::exists(sk) || fs::exists(pk))) {
    throw InputError("refusing to overwrite " + sk.string() + " / " + pk.string());
  }
  Rng rng(g.seed);
  const secure::KeyPair kp = secure::KeyPair::generate(rng);
  secure::save_secret_key(kp, sk);
  secure::save_public_key(kp.public_key(), pk);
  if (g.json) {
    std::cout << json{{"secret_key", sk.string()},
                      {"public_key", pk.string()},
                      {"pk", to_hex(kp.public_key())}}
              << "\n";
  } else {
    std::cout << "wrote " << sk.string() << " and " << pk.string() << "\n"
              << "pk " << to_hex(kp.public_key()) << "\n";
  }
  return kOk;
}

// ---- prove ----------------------------------------------------------------

struct ProveArgs {
  std::vector<std::string> scenarios;
  std::string manifest;
  std::string key;
  std::string listen = "127.0.0.1:0";
  std::uint64_t ips = 0;
  std::uint64_t timeout_ms = 10'000;
  std::uint64_t max_instructions = 10'000'000;
  std::string port_file;
};

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

// Manifest lines: "<app_id hex> <scenario path>", '#' comments.
std::vector<std::pair<secure::AppId, harness::Scenario>> read_manifest(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot read manifest " + p.string());
  std::vector<std::pair<secure::AppId, harness::Scenario>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string id, path;
    if (!(ls >> id)) continue;
    if (!(ls >> path)) {
      throw InputError(p.string() + ":" + std::to_string(lineno) + ": expected <app_id> <scenario>");
    }
    fs::path sp = path;
    if (sp.is_relative()) sp = p.parent_path() / sp;
    out.emplace_back(parse_hex_array<16>(id, "app_id"), load_scenario_input(sp));
  }
  return out;
}

int cmd_prove(const Globals& g, const ProveArgs& a) {
  std::vector<std::pair<secure::AppId, harness::Scenario>> apps;
  if (!a.manifest.empty()) apps = read_manifest(a.manifest);
  for (const auto& s : a.scenarios) {
    harness::Scenario sc = load_scenario_input(s);
    apps.emplace_back(harness::build(sc).image.app_id, std::move(sc));
  }
  if (apps.empty()) throw InputError("prove needs --scenario or --manifest");
  if (!fs::exists(a.key)) throw InputError("no such key file: " + a.key);
  secure::KeyPair keys = secure::load_secret_key(a.key);

  std::vector<std::unique_ptr<harness::Device>> devices;
  std::map<secure::AppId, harness::Device*> by_id;
  for (auto& [id, sc] : apps) {
    harness::DeviceImage img = harness::build(sc).image;
    img.app_id = id;
    devices.push_back(std::make_unique<harness::Device>(std::move(img), keys));
    by_id[id] = devices.back().get();
  }

  proto::ProverConfig cfg;
  try {
    cfg.listen = proto::parse_endpoint(a.listen);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  cfg.ips = a.ips;
  cfg.timeout = proto::Millis(a.timeout_ms);
  cfg.max_instructions = a.max_instructions;
  proto::ProverServer server(by_id, cfg);
  const std::uint16_t port = server.start();

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (!a.port_file.empty()) {
    const fs::path tmp = a.port_file + ".tmp";
    std::ofstream(tmp) << port << "\n";
    fs::rename(tmp, a.port_file);
  }
  if (g.json) {
    json ids = json::array();
    for (const auto& [id, sc] : apps) ids.push_back({{"app_id", to_hex(id)}, {"scenario", sc.name}});
    std::cout << json{{"listening", cfg.listen.host + ":" + std::to_string(port)}, {"apps", ids}}
              << std::endl;
  } else {
    std::cout << "listening on " << cfg.listen.host << ":" << port << std::endl;
    for (const auto& [id, sc] : apps) {
      std::cout << "  app " << to_hex(id) << " " << sc.name << std::endl;
    }
  }
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  const auto st = server.stats();
  std::cerr << "served " << st.sessions << " sessions (" << st.reports << " reports, "
            << st.errors << " errors)\n";
  return kOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string connect;
  std::string report;
  std::string scenario;
  std::string image;
  std::string cfg;
  std::string pk;
  std::string app_id;
  std::string chl;
  std::string save_report;
  std::uint64_t timeout_ms = 15'000;
};

int print_verdict(const Globals& g, const verify::Verdict& v,
                  const secure::Report& rep, const secure::Challenge& chl) {
  if (g.json) {
    json j = json::parse(verify::verdict_json(v));
    j["chl"] = to_hex(chl);
    j["records"] = rep.cflog.size();
    std::cout << j << "\n";
  } else {
    std::cout << verify::explain(v, rep.cflog) << "\n";
  }
  return v.outcome == verify::Outcome::Accept ? kOk : kFail;
}

int cmd_verify(const Globals& g, const VerifyArgs& a) {
  if (a.connect.empty() == a.report.empty()) {
    throw InputError("verify needs exactly one of --connect or --report");
  }
  if (!fs::exists(a.pk)) throw InputError("no such key file: " + a.pk);
  const secure::PublicKey pk = secure::load_public_key(a.pk);

  verify::NonceRegistry nonces;
  verify::VerificationPolicy policy;
  policy.pk = pk;
  policy.nonces = &nonces;
  std::optional<secure::AppId> app_id;
  if (!a.scenario.empty()) {
    const harness::BuiltApp b = harness::build(load_scenario_input(a.scenario));
    policy.expected_h_app = b.expected_h_app;
    policy.cfg = b.cfg;
    app_id = b.image.app_id;
  } else if (!a.image.empty() && !a.cfg.empty()) {
    const vm::Program img = load_program(a.image);
    policy.expected_h_app = secure::blake2s(img.bytes());
    std::ifstream cs(a.cfg);
    if (!cs) throw InputError("cannot read " + a.cfg);
    try {
      policy.cfg = cfg::read_cfg(cs);
    } catch (const std::exception& e) {
      throw InputError(a.cfg + ": " + e.what());
    }
  } else {
    throw InputError("verify needs --scenario, or --image with --cfg");
  }
  if (!a.app_id.empty()) app_id = parse_hex_array<16>(a.app_id, "app_id");

  if (!a.report.empty()) {
    if (a.chl.empty()) throw InputError("offline verification needs --chl");
    const secure::Challenge chl = parse_hex_array<32>(a.chl, "chl");
    nonces.issue(chl);
    auto decoded = proto::decode_report(read_file(a.report));
    if (auto* e = std::get_if<proto::DecodeError>(&decoded)) {
      const std::string why = "undecodable report: " + std::string(proto::decode_error_name(*e));
      if (g.json) std::cout << json{{"outcome", "Malformed"}, {"detail", why}} << "\n";
      else std::cout << why << "\n";
      return kFail;
    }
    const auto& rep = std::get<secure::Report>(decoded);
    return print_verdict(g, proto::adjudicate(rep, chl, policy), rep, chl);
  }

  if (!app_id) throw InputError("online verification needs --app-id or --scenario");
  proto::Endpoint ep;
  try {
    ep = proto::parse_endpoint(a.connect);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  Rng rng(g.seed);
  const proto::SessionResult r =
      proto::verifier_request(ep, policy, *app_id, rng, proto::Millis(a.timeout_ms));
  if (!a.save_report.empty() && !r.report_bytes.empty()) write_file(a.save_report, r.report_bytes);
  if (r.verdict) return print_verdict(g, *r.verdict, *r.report, r.chl);
  const std::string code(proto::error_code_name(r.error->code));
  if (g.json) {
    std::cout << json{{"outcome", r.outcome()}, {"error", code}, {"detail", r.error->text},
                      {"chl", to_hex(r.chl)}}
              << "\n";
  } else {
    std::cout << r.outcome() << ": " << code << ": " << r.error->text << "\n";
  }
  return kFail;
}

// ---- attack ---------------------------------------------------------------

struct AttackArgs {
  std::string corpus;
  std::vector<std::string> scenarios;
  bool serial = false;
};

int cmd_attack(const Globals& g, const AttackArgs& a) {
  std::vector<harness::Scenario> scs;
  if (a.scenarios.empty()) {
    const fs::path dir = a.corpus.empty() ? harness::default_corpus_dir() : fs::path(a.corpus);
    if (!fs::is_directory(dir)) throw InputError("no such corpus directory: " + dir.string());
    try {
      scs = harness::load_corpus(dir);
    } catch (const HarnessError& e) {
      throw InputError(e.what());
    }
  } else {
    for (const auto& s : a.scenarios) scs.push_back(load_scenario_input(s));
  }
  const std::uint64_t seed = g.seed.value_or(1);
  const auto results = harness::map_indices(
      scs.size(),
      [&](std::size_t i) { return harness::run_scenario(scs[i], seed + i); },
      a.serial ? harness::Exec::Serial : harness::Exec::Parallel);

  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  if (g.json) {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(result_json(r));
    std::cout << json{{"scenarios", arr}, {"passed", passed}, {"total", results.size()}}.dump(2)
              << "\n";
  } else {
    std::cout << std::left << std::setw(32) << "scenario" << std::setw(10) << "mode"
              << std::setw(26) << "expected" << std::setw(26) << "actual" << "result\n";
    for (const auto& r : results) {
      std::cout << std::setw(32) << r.name << std::setw(10) << harness::mode_name(r.mode)
                << std::setw(26) << harness::outcome_text(r.expected) << std::setw(26)
                << harness::outcome_text(r.actual) << (r.passed ? "PASS" : "FAIL") << "\n";
    }
    std::cout << passed << "/" << results.size() << " scenarios as expected\n";
  }
  return passed == results.size() ? kOk : kFail;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::size_t samples = 100;
  int max_isr_len = 24;
  bool serial = false;
};

json stat_json(const harness::Stat& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"variance", s.variance}};
}

int cmd_bench(const Globals& g, const BenchArgs& a) {
  if (a.samples == 0) throw InputError("--samples must be positive");
  const std::uint64_t seed = g.seed.value_or(1);
  const auto items = harness::map_indices(
      a.samples,
      [&](std::size_t i) {
        return harness::overhead_case(seed + i, static_cast<int>(i % static_cast<std::size_t>(a.max_isr_len + 1)));
      },
      a.serial ? harness::Exec::Serial : harness::Exec::Parallel);

  harness::OverheadSamples all;
  std::uint64_t base_total = 0;
  std::size_t failed = 0;
  for (const auto& it : items) {
    if (!it.error.empty()) {
      ++failed;
      continue;
    }
    all.append(it.samples);
    base_total += it.baseline_retired;
  }
  // Interrupt-free reference run: dispatcher cost must be zero.
  const harness::GeneratedCase quiet = harness::generate_case(seed);
  const harness::CaseRun qr = harness::run_case(quiet, {}, secure::RuntimeMode::IscFlat, true);
  const harness::OverheadSamples qs = harness::measure_overhead(
      qr.outcome.trace, quiet.instrumented.program, quiet.instrumented.addr_map);
  std::uint64_t quiet_dispatch = 0;
  for (auto x : qs.dispatcher_entry) quiet_dispatch += x;
  for (auto x : qs.dispatcher_exit) quiet_dispatch += x;

  const auto eg = harness::summarize(all.entry_gate);
  const auto dg = harness::summarize(all.dest_gate);
  const auto de = harness::summarize(all.dispatcher_entry);
  const auto dx = harness::summarize(all.dispatcher_exit);
  if (g.json) {
    std::cout << json{{"samples", a.samples},
                      {"failed", failed},
                      {"entry_gate", stat_json(eg)},
                      {"dest_gate", stat_json(dg)},
                      {"dispatcher_entry", stat_json(de)},
                      {"dispatcher_exit", stat_json(dx)},
                      {"instrumented_retired", all.total_retired},
                      {"baseline_retired", base_total},
                      {"interrupt_free_dispatcher_cost", quiet_dispatch}}
                     .dump(2)
              << "\n";
  } else {
    const auto row = [](const char* name, const harness::Stat& s) {
      std::cout << std::left << std::setw(24) << name << std::right << std::setw(8) << s.n
                << std::setw(10) << std::fixed << std::setprecision(2) << s.mean << std::setw(6)
                << s.min << std::setw(6) << s.max << std::setw(10) << s.variance << "\n";
    };
    std::cout << "simulated-instruction overhead over " << a.samples << " generated cases\n"
              << std::left << std::setw(24) << "event" << std::right << std::setw(8) << "n"
              << std::setw(10) << "mean" << std::setw(6) << "min" << std::setw(6) << "max"
              << std::setw(10) << "variance" << "\n";
    row("entry gate", eg);
    row("destination gate", dg);
    row("dispatcher entry", de);
    row("dispatcher exit", dx);
    std::cout << "total retired: " << all.total_retired << " instrumented vs " << base_total
              << " uninstrumented baseline\n"
              << "interrupt-free run dispatcher cost: " << quiet_dispatch << "\n";
    if (failed) std::cout << failed << " cases failed to produce a report\n";
  }
  return failed == 0 ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISC-FLAT simulator: instrument, attest, verify and attack"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable output");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for all randomness (default: OS entropy)");

  InstrumentArgs ia;
  auto* ins = app.add_subcommand("instrument", "Insert logging gates and export the CFG");
  ins->add_option("input", ia.in, "Program source (.s) or image manifest")->required();
  ins->add_option("output", ia.out, "Instrumented image manifest")->required();
  ins->add_option("--cfg", ia.cfg_out, "CFG output (default: output with a .cfg extension)");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run one scenario and print its outcome");
  run->add_option("scenario", ra.scenario, "Scenario file")->required();
  run->add_flag("--trace", ra.trace, "Print the instruction trace");

  ProveArgs pa;
  auto* prove = app.add_subcommand("prove", "Serve attestation requests");
  prove->add_option("--scenario", pa.scenarios, "Device configuration (repeatable)");
  prove->add_option("--manifest", pa.manifest, "app_id -> scenario manifest");
  prove->add_option("--key", pa.key, "Device secret key")->required();
  prove->add_option("--listen", pa.listen, "host:port (port 0 picks one)");
  prove->add_option("--ips", pa.ips, "Throttle to this many simulated instructions per second");
  prove->add_option("--timeout-ms", pa.timeout_ms, "Wall-clock budget per session");
  prove->add_option("--max-instructions", pa.max_instructions, "Instruction budget per session");
  prove->add_option("--port-file", pa.port_file, "Write the bound port here once listening");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Request and verify a report, or verify a saved one");
  ver->add_option("--connect", va.connect, "Prover host:port");
  ver->add_option("--report", va.report, "Saved report (wire format)");
  ver->add_option("--scenario", va.scenario, "Derive expected App and CFG from a scenario");
  ver->add_option("--image", va.image, "Expected instrumented image");
  ver->add_option("--cfg", va.cfg, "CFG of the original App");
  ver->add_option("--pk", va.pk, "Device public key")->required();
  ver->add_option("--app-id", va.app_id, "App identifier (32 hex digits)");
  ver->add_option("--chl", va.chl, "Challenge the saved report must answer");
  ver->add_option("--save-report", va.save_report, "Store the received report bytes");
  ver->add_option("--timeout-ms", va.timeout_ms, "Session timeout");

  AttackArgs aa;
  auto* atk = app.add_subcommand("attack", "Run the attack corpus");
  atk->add_option("--corpus", aa.corpus, "Directory of .scn files");
  atk->add_option("scenarios", aa.scenarios, "Individual scenario files");
  atk->add_flag("--serial", aa.serial, "Run scenarios one after another");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Per-event overhead in simulated instructions");
  bench->add_option("--samples", ba.samples, "Generated cases");
  bench->add_option("--max-isr-len", ba.max_isr_len, "Longest handler body");
  bench->add_flag("--serial", ba.serial, "Disable OpenMP");

  KeygenArgs ka;
  auto* kg = app.add_subcommand("keygen", "Generate a device key pair");
  kg->add_option("--out", ka.out, "Path prefix for <prefix>.sk and <prefix>.pk")->required();
  kg->add_flag("--force", ka.force, "Overwrite existing files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*ins) return cmd_instrument(g, ia);
    if (*run) return cmd_run(g, ra);
    if (*prove) return cmd_prove(g, pa);
    if (*ver) return cmd_verify(g, va);
    if (*atk) return cmd_attack(g, aa);
    if (*bench) return cmd_bench(g, ba);
    if (*kg) return cmd_keygen(g, ka);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const MalformedKey& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const HarnessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const proto::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
