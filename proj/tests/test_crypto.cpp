#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <thread>

#include "dsse/crypto.hpp"

using namespace dsse;
using namespace dsse::crypto;

namespace {
Key128 key_of(uint8_t fill) {
  Key128 k;
  k.fill(fill);
  return k;
}
}  // namespace

TEST_CASE("keyword key derivation is deterministic and splits cleanly") {
  Key128 k = key_of(0x11);
  auto a = derive_keyword_keys(k, "apple");
  auto b = derive_keyword_keys(k, "apple");
  CHECK(a.k_w == b.k_w);
  CHECK(a.k_c == b.k_c);
  CHECK(a.k_w != a.k_c);

  auto c = derive_keyword_keys(k, "apples");
  CHECK(a.k_w != c.k_w);
  CHECK(a.k_c != c.k_c);

  auto d = derive_keyword_keys(key_of(0x12), "apple");
  CHECK(a.k_w != d.k_w);

  CHECK_THROWS_AS(derive_keyword_keys(k, ""), std::invalid_argument);
}

TEST_CASE("label families never collide with each other") {
  Key128 k = key_of(0x22);
  std::set<Label> seen;
  for (uint64_t x : {0ull, 1ull, 2ull, 255ull, 256ull, 1ull << 40}) {
    CHECK(seen.insert(label_h1(k, x)).second);
    CHECK(seen.insert(label_h2(k, x)).second);
    CHECK(seen.insert(label_h3(k, x)).second);
  }
  // Same input, different family -> different label even at every position.
  CHECK(label_h1(k, 7) != label_h2(k, 7));
  CHECK(label_h2(k, 7) != label_h3(k, 7));
  CHECK(label_h1(k, 7) == label_h1(k, 7));
}

TEST_CASE("index labels bind keyword, version and count unambiguously") {
  Key128 k1 = key_of(0x33);
  CHECK(bunker_label(k1, "ab", 1, 1) != bunker_label(k1, "a", 11, 1));
  CHECK(bunker_label(k1, "w", 1, 2) != bunker_label(k1, "w", 2, 1));
  CHECK(bunker_label(k1, "w", 1, 2) == bunker_label(k1, "w", 1, 2));
  CHECK_THROWS_AS(bunker_label(k1, "", 0, 0), std::invalid_argument);

  // Distinct (version, count) pairs map to distinct labels.
  std::set<Label> labels;
  for (uint64_t v = 0; v < 8; v++)
    for (uint64_t c = 1; c <= 64; c++) CHECK(labels.insert(bunker_label(k1, "kw", v, c)).second);
}

TEST_CASE("encrypt/decrypt round-trips and hides the plaintext length only") {
  Key128 k = key_of(0x44);
  std::mt19937_64 rng(7);
  for (size_t len : {size_t(0), size_t(1), size_t(17), size_t(1000), size_t(1 << 20)}) {
    Bytes pt(len);
    for (auto& b : pt) b = uint8_t(rng());
    auto ct = encrypt(k, pt);
    CHECK(ct.body.size() == len);
    CHECK(ct.wire_size() == len + 28);
    CHECK(decrypt(k, ct) == pt);
  }
  // Same plaintext twice -> different ciphertext (fresh nonce).
  Bytes pt{1, 2, 3};
  auto c1 = encrypt(k, pt);
  auto c2 = encrypt(k, pt);
  CHECK(c1.nonce != c2.nonce);
  CHECK(c1.body != c2.body);
}

TEST_CASE("decryption under the wrong key is an authentication failure") {
  auto pt = Bytes{9, 9, 9, 9};
  auto ct = encrypt(key_of(0x55), pt);
  CHECK_THROWS_AS(decrypt(key_of(0x56), ct), AuthError);
}

TEST_CASE("any single bit flip in the ciphertext body fails authentication") {
  Key128 k = key_of(0x66);
  Bytes pt(32, 0xa5);
  auto ct = encrypt(k, pt);
  for (size_t bit = 0; bit < 128; bit++) {
    auto tampered = ct;
    tampered.body[bit / 8] ^= uint8_t(1u << (bit % 8));
    CHECK_THROWS_AS(decrypt(k, tampered), AuthError);
  }
  // Tag flips fail too.
  auto tampered = ct;
  tampered.tag[0] ^= 1;
  CHECK_THROWS_AS(decrypt(k, tampered), AuthError);
}

TEST_CASE("primitives are safe under concurrent callers") {
  Key128 k = key_of(0x77);
  auto reference = derive_keyword_keys(k, "shared");
  std::vector<std::thread> threads;
  std::array<bool, 8> ok{};
  for (int t = 0; t < 8; t++) {
    threads.emplace_back([&, t] {
      bool good = true;
      for (int i = 0; i < 200; i++) {
        auto kk = derive_keyword_keys(k, "shared");
        good &= kk.k_w == reference.k_w && kk.k_c == reference.k_c;
        Bytes pt{uint8_t(t), uint8_t(i)};
        good &= decrypt(k, encrypt(k, pt)) == pt;
      }
      ok[size_t(t)] = good;
    });
  }
  for (auto& th : threads) th.join();
  for (bool good : ok) CHECK(good);
}

TEST_CASE("seeded key bundles are reproducible, random ones distinct") {
  auto a = KeyBundle::from_seed(42);
  auto b = KeyBundle::from_seed(42);
  auto c = KeyBundle::from_seed(43);
  CHECK(a.k_sigma == b.k_sigma);
  CHECK(a.k_bf == b.k_bf);
  CHECK(a.k_sigma != c.k_sigma);
  CHECK(a.k_sigma != a.k_f);  // subkeys are domain-separated

  auto r1 = KeyBundle::random();
  auto r2 = KeyBundle::random();
  CHECK(r1.k_sigma != r2.k_sigma);
}
