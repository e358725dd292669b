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


#include <gtest/gtest.h>

#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "iscflat/secure/crypto.hpp"
#include "json.hpp"
#include "test_support.hpp"

#ifndef ISCFLAT_CLI
#error "ISCFLAT_CLI must name the built command-line tool"
#endif

namespace {

using testing_support::run_command;
using testing_support::source_dir;
using testing_support::TempDir;

std::string cli() { return std::string("'") + ISCFLAT_CLI + "'"; }
std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Digest of every input file the tool reads.
std::string inputs_digest() {
  std::string all;
  for (const char* dir : {"programs", "scenarios"}) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(source_dir() / dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) all += f.string() + "\n" + slurp(f);
  }
  const auto d = iscflat::secure::blake2s(std::string_view(all));
  return std::string(d.begin(), d.end());
}

TEST(Cli, InstrumentReportsCountsAndWritesArtifacts) {
  TempDir dir;
  const auto r = run_command(cli() + " instrument " + q(source_dir() / "programs/six_node_app.s") + " " +
                             q(dir.path() / "app.img") + " --cfg " + q(dir.path() / "app.cfg"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("6 nodes, 6 edges, 13 inserted"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "app.img"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "app.cfg"));

  const auto s = run_command(cli() + " instrument " + q(source_dir() / "programs/straight.s") + " " +
                             q(dir.path() / "s.img"));
  EXPECT_EQ(s.exit_code, 0);
  EXPECT_NE(s.out.find("1 node, 0 edges, 1 inserted"), std::string::npos) << s.out;
}

TEST(Cli, BadInputsExitWithTwo) {
  TempDir dir;
  EXPECT_EQ(run_command(cli() + " instrument /nonexistent.s " + q(dir.path() / "x.img") + " 2>/dev/null").exit_code, 2);
  EXPECT_EQ(run_command(cli() + " run /nonexistent.scn 2>/dev/null").exit_code, 2);
  EXPECT_EQ(run_command(cli() + " frobnicate 2>/dev/null").exit_code, 2);
  std::ofstream(dir.path() / "bad.pk") << "garbage\n";
  EXPECT_EQ(run_command(cli() + " verify --pk " + q(dir.path() / "bad.pk") + " --report " +
                        q(dir.path() / "none.bin") + " --chl 00 --scenario " +
                        q(source_dir() / "scenarios/ex1-benign-iscflat.scn") + " 2>/dev/null")
                .exit_code,
            2);
}

TEST(Cli, KeygenIsSeededOrFresh) {
  TempDir dir;
  const auto gen = [&](const std::string& prefix, const std::string& seed) {
    const auto r = run_command(cli() + seed + " keygen --out " + q(dir.path() / prefix));
    EXPECT_EQ(r.exit_code, 0) << r.out;
    return slurp(dir.path() / (prefix + ".pk"));
  };
  EXPECT_EQ(gen("a", " --seed 9"), gen("b", " --seed 9"));
  EXPECT_NE(gen("c", ""), gen("d", ""));
  // Refuses to overwrite without --force.
  EXPECT_NE(run_command(cli() + " keygen --out " + q(dir.path() / "a") + " 2>/dev/null").exit_code, 0);
  EXPECT_EQ(run_command(cli() + " keygen --force --out " + q(dir.path() / "a")).exit_code, 0);
}

TEST(Cli, AttackCorpusPassesAndLeavesInputsAlone) {
  const std::string before = inputs_digest();
  const auto r = run_command(cli() + " attack");
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("scenarios as expected"), std::string::npos);
  EXPECT_EQ(inputs_digest(), before);
}

TEST(Cli, SeededRunIsDeterministic) {
  const std::string cmd = cli() + " --seed 3 --json run " + q(source_dir() / "scenarios/ex1-benign-iscflat.scn");
  const auto a = run_command(cmd);
  const auto b = run_command(cmd);
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\"passed\": true"), std::string::npos) << a.out;
}

TEST(Cli, OnlineAndOfflineVerification) {
  TempDir dir;
  const auto scn = q(source_dir() / "scenarios/ex1-benign-iscflat.scn");
  ASSERT_EQ(run_command(cli() + " --seed 4 keygen --out " + q(dir.path() / "dev")).exit_code, 0);
  const auto port_file = dir.path() / "port";
  const auto started = run_command(cli() + " prove --scenario " + scn + " --key " + q(dir.path() / "dev.sk") +
                                   " --listen 127.0.0.1:0 --port-file " + q(port_file) + " >" +
                                   q(dir.path() / "prove.log") + " 2>&1 & echo $!");
  const std::string pid = started.out.substr(0, started.out.find('\n'));
  ASSERT_FALSE(pid.empty());
  for (int i = 0; i < 100 && !std::filesystem::exists(port_file); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  std::string port = slurp(port_file);
  while (!port.empty() && std::isspace(static_cast<unsigned char>(port.back()))) port.pop_back();
  ASSERT_FALSE(port.empty()) << slurp(dir.path() / "prove.log");

  const auto report = dir.path() / "r.bin";
  const auto online = run_command(cli() + " --seed 11 --json verify --connect 127.0.0.1:" + port +
                                  " --pk " + q(dir.path() / "dev.pk") + " --scenario " + scn +
                                  " --save-report " + q(report));
  run_command("kill " + pid);
  ASSERT_EQ(online.exit_code, 0) << online.out;
  EXPECT_NE(online.out.find("Accept"), std::string::npos) << online.out;

  // The challenge the seeded verifier drew is in its JSON output.
  const auto j = nlohmann::json::parse(online.out);
  EXPECT_EQ(j.at("outcome"), "Accept");
  const std::string chl = j.at("chl").get<std::string>();
  ASSERT_EQ(chl.size(), 64u);
  const std::string offline = cli() + " verify --report " + q(report) + " --chl " + chl + " --pk " +
                              q(dir.path() / "dev.pk") + " --scenario " + scn;
  const auto ok = run_command(offline);
  EXPECT_EQ(ok.exit_code, 0) << ok.out;

  std::string bytes = slurp(report);
  bytes[10] = static_cast<char>(bytes[10] ^ 0x01);
  std::ofstream(report, std::ios::binary) << bytes;
  const auto bad = run_command(offline);
  EXPECT_EQ(bad.exit_code, 1) << bad.out;
  EXPECT_NE(bad.out.find("RejectSignature"), std::string::npos) << bad.out;
}

}  // namespace
