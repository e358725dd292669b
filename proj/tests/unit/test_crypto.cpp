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

#include <fstream>
#include <random>

#include "../oracles/blake2s_ref.hpp"
#include "iscflat/secure/crypto.hpp"
#include "iscflat/secure/report.hpp"
#include "iscflat/util/errors.hpp"
#include "iscflat/util/hex.hpp"
#include "test_support.hpp"

namespace {

using namespace iscflat;
using namespace iscflat::secure;

std::string hex_of(const Digest& d) { return to_hex(d); }

Bytes unhex(std::string_view s) { return *from_hex(s); }

TEST(Blake2s, KnownVectors) {
  EXPECT_EQ(hex_of(blake2s(std::string_view{})),
            "69217a3079908094e11121d042354a7c1f55b6482ca1a51e1b250dfd1ed0eef9");
  EXPECT_EQ(hex_of(blake2s(std::string_view{"abc"})),
            "508c5e8c327c14e2e1a72ba34eeb452f37458b209ed63a294d999b4c86675982");
  Bytes ramp;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 256; ++i) ramp.push_back(static_cast<std::uint8_t>(i));
  }
  EXPECT_EQ(hex_of(blake2s(ramp)),
            "b928a17862e211e99759ba8819280803a914cd3dee7c5d711a3b5185aa96a7b3");
}

TEST(Blake2s, MatchesReferenceImplementationOnRandomInputs) {
  std::mt19937 rng(3);
  for (std::size_t len = 0; len < 300; ++len) {
    Bytes m(len);
    for (auto& b : m) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(blake2s(m), oracle::blake2s_ref(m)) << "len " << len;
  }
}

TEST(Ed25519, StandardVectorOne) {
  std::array<std::uint8_t, 32> seed{};
  const Bytes sk = unhex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
  std::copy(sk.begin(), sk.end(), seed.begin());
  const KeyPair kp = KeyPair::from_seed(seed);
  EXPECT_EQ(to_hex(kp.public_key()),
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const Bytes sig = kp.sign({});
  EXPECT_EQ(to_hex(sig),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
  EXPECT_TRUE(verify(kp.public_key(), {}, sig));
}

TEST(Ed25519, AnySingleBitFlipBreaksTheSignature) {
  Rng rng(11);
  const KeyPair kp = KeyPair::generate(rng);
  const Bytes msg = signed_message({0x8000, 0x8008, 0x200C}, Digest{}, Challenge{}, {});
  const Bytes sig = kp.sign(msg);
  ASSERT_EQ(sig.size(), kSignatureBytes);
  ASSERT_TRUE(verify(kp.public_key(), msg, sig));
  for (std::size_t bit = 0; bit < 8 * sig.size(); bit += 3) {
    Bytes s = sig;
    s[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_FALSE(verify(kp.public_key(), msg, s)) << bit;
  }
  for (std::size_t bit = 0; bit < 8 * msg.size(); bit += 5) {
    Bytes m = msg;
    m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_FALSE(verify(kp.public_key(), m, sig)) << bit;
  }
  EXPECT_FALSE(verify(kp.public_key(), msg, Bytes(sig.begin(), sig.end() - 1)));
}

TEST(Ed25519, BadPublicKeyLengthThrows) {
  const Bytes short_pk(31, 1);
  EXPECT_THROW(verify(short_pk, {}, Bytes(64)), MalformedKey);
}

TEST(Keys, SeededGenerationIsDeterministicAndDistinct) {
  Rng a(42), b(42), c(43);
  EXPECT_EQ(KeyPair::generate(a).public_key(), KeyPair::generate(b).public_key());
  Rng d(42);
  EXPECT_NE(KeyPair::generate(d).public_key(), KeyPair::generate(c).public_key());
}

TEST(Keys, FilesRoundTripAndRejectGarbage) {
  testing_support::TempDir dir;
  Rng rng(9);
  const KeyPair kp = KeyPair::generate(rng);
  save_secret_key(kp, dir.path() / "k.sk");
  save_public_key(kp.public_key(), dir.path() / "k.pk");
  const KeyPair back = load_secret_key(dir.path() / "k.sk");
  EXPECT_EQ(back.public_key(), kp.public_key());
  EXPECT_EQ(load_public_key(dir.path() / "k.pk"), kp.public_key());
  EXPECT_EQ(back.sign(Bytes{1, 2, 3}), kp.sign(Bytes{1, 2, 3}));

  std::ofstream(dir.path() / "bad.pk") << "not a key\n";
  EXPECT_THROW(load_public_key(dir.path() / "bad.pk"), MalformedKey);
  EXPECT_THROW(load_secret_key(dir.path() / "k.pk"), MalformedKey);
  EXPECT_THROW(load_public_key(dir.path() / "k.sk"), MalformedKey);
  EXPECT_THROW(load_public_key(dir.path() / "absent.pk"), MalformedKey);
}

TEST(Report, SignedMessageLayout) {
  Digest h{};
  h.fill(0xAA);
  Challenge chl{};
  chl.fill(0x55);
  const std::vector<vm::Word> log = {0x8000, 0x200C};
  const Bytes out = {1, 2, 3, 4};
  const Bytes m = signed_message(log, h, chl, out);
  ASSERT_EQ(m.size(), 32u + 32u + 32u + 4u);
  const Bytes lb = cflog_bytes(log);
  EXPECT_EQ(lb, (Bytes{0x00, 0x80, 0, 0, 0x0C, 0x20, 0, 0}));
  const Digest hl = oracle::blake2s_ref(lb);
  EXPECT_TRUE(std::equal(hl.begin(), hl.end(), m.begin()));
  EXPECT_TRUE(std::equal(h.begin(), h.end(), m.begin() + 32));
  EXPECT_TRUE(std::equal(chl.begin(), chl.end(), m.begin() + 64));
  EXPECT_TRUE(std::equal(out.begin(), out.end(), m.begin() + 96));
}

TEST(Hex, RejectsOddAndNonHex) {
  EXPECT_FALSE(from_hex("abc"));
  EXPECT_FALSE(from_hex("zz"));
  EXPECT_EQ(*from_hex("00ff"), (std::vector<std::uint8_t>{0, 255}));
}

}  // namespace
