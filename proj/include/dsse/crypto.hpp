#pragma once

#include <optional>

#include "dsse/types.hpp"

namespace dsse::crypto {

// All symmetric material is 128-bit. The keyed-hash family H1/H2/H3 and the
// PRF F share one primitive (HMAC-SHA256 truncated to 16 bytes); family
// members are separated by a leading tag byte in the message.
struct KeyBundle {
  Key128 k_sigma{};  // per-keyword key derivation
  Key128 k_f{};      // document encryption
  Key128 k1{};       // index-label PRF (version-labelled scheme)
  Key128 k2{};       // index-value encryption (version-labelled scheme)
  Key128 k_bf{};     // bloom filter hashing

  static KeyBundle random();
  // Deterministic expansion for reproducible benchmarks; not for production.
  static KeyBundle from_seed(uint64_t seed);
};

struct KeywordKeys {
  Key128 k_w;  // feeds the label family H1/H2/H3
  Key128 k_c;  // encrypts per-keyword counters
};

struct Ciphertext {
  std::array<uint8_t, 12> nonce{};
  Bytes body;  // same length as the plaintext
  std::array<uint8_t, 16> tag{};

  size_t wire_size() const { return 12 + body.size() + 16; }
};

// F(k_sigma, w) split into two independent subkeys. Rejects empty keywords.
KeywordKeys derive_keyword_keys(const Key128& k_sigma, const std::string& keyword);

// Label family over (key, counter) resp. (key, id): 16-byte outputs,
// domain-separated by family index so the three never collide.
Label label_h1(const Key128& k_w, uint64_t counter);
Label label_h2(const Key128& k_w, uint64_t counter);
Label label_h3(const Key128& k_w, DocId id);

// Index label for the version-labelled scheme: PRF over the unambiguous
// encoding len(w) || w || version || count.
Label bunker_label(const Key128& k1, const std::string& keyword, uint64_t version,
                   uint64_t count);

// AES-128-GCM with a fresh random nonce per call.
Ciphertext encrypt(const Key128& key, std::span<const uint8_t> plaintext);
Bytes decrypt(const Key128& key, const Ciphertext& ct);  // throws AuthError

// Raw PRF access (16-byte output) for callers that need custom encodings.
Label prf16(const Key128& key, std::span<const uint8_t> msg);

Bytes random_bytes(size_t n);

}  // namespace dsse::crypto
