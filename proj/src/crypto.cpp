#include "dsse/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>
#include <mutex>

namespace dsse::crypto {

namespace {

// One fetched HMAC-SHA256 implementation shared process-wide; contexts are
// duplicated per call so concurrent callers never share mutable state.
EVP_MAC* hmac_impl() {
  static EVP_MAC* mac = [] {
    EVP_MAC* m = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
    if (!m) throw std::runtime_error("HMAC fetch failed");
    return m;
  }();
  return mac;
}

struct MacCtxFree {
  void operator()(EVP_MAC_CTX* c) const { EVP_MAC_CTX_free(c); }
};
using MacCtx = std::unique_ptr<EVP_MAC_CTX, MacCtxFree>;

void hmac256(const Key128& key, std::span<const uint8_t> msg, uint8_t out[32]) {
  // Re-initializing a cached context is ~3x cheaper than allocating one per
  // call, and label derivation dominates the hot paths.
  thread_local MacCtx ctx;
  if (!ctx) {
    ctx.reset(EVP_MAC_CTX_new(hmac_impl()));
    if (!ctx) throw std::runtime_error("HMAC ctx alloc failed");
  }
  char digest[] = "SHA256";
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_end()};
  if (EVP_MAC_init(ctx.get(), key.data(), key.size(), params) != 1 ||
      EVP_MAC_update(ctx.get(), msg.data(), msg.size()) != 1)
    throw std::runtime_error("HMAC failed");
  size_t len = 0;
  uint8_t buf[64];
  if (EVP_MAC_final(ctx.get(), buf, &len, sizeof buf) != 1 || len != 32)
    throw std::runtime_error("HMAC final failed");
  std::memcpy(out, buf, 32);
}

struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

Label truncate16(const uint8_t full[32]) {
  Label out;
  std::memcpy(out.data(), full, 16);
  return out;
}

}  // namespace

KeyBundle KeyBundle::random() {
  KeyBundle kb;
  Key128* keys[] = {&kb.k_sigma, &kb.k_f, &kb.k1, &kb.k2, &kb.k_bf};
  for (Key128* k : keys)
    if (RAND_bytes(k->data(), int(k->size())) != 1)
      throw std::runtime_error("RAND_bytes failed");
  return kb;
}

KeyBundle KeyBundle::from_seed(uint64_t seed) {
  Key128 root{};
  auto s = be64(seed);
  std::memcpy(root.data(), s.data(), 8);
  KeyBundle kb;
  Key128* keys[] = {&kb.k_sigma, &kb.k_f, &kb.k1, &kb.k2, &kb.k_bf};
  for (uint8_t i = 0; i < 5; i++) {
    uint8_t msg[2] = {0x4b, i};
    uint8_t full[32];
    hmac256(root, std::span<const uint8_t>(msg, 2), full);
    std::memcpy(keys[i]->data(), full, 16);
  }
  return kb;
}

Label prf16(const Key128& key, std::span<const uint8_t> msg) {
  uint8_t full[32];
  hmac256(key, msg, full);
  return truncate16(full);
}

KeywordKeys derive_keyword_keys(const Key128& k_sigma, const std::string& keyword) {
  if (keyword.empty()) throw std::invalid_argument("empty keyword");
  uint8_t full[32];
  hmac256(k_sigma,
          std::span<const uint8_t>(
              reinterpret_cast<const uint8_t*>(keyword.data()), keyword.size()),
          full);
  KeywordKeys kk;
  std::memcpy(kk.k_w.data(), full, 16);
  std::memcpy(kk.k_c.data(), full + 16, 16);
  return kk;
}

namespace {
Label label_family(const Key128& k, uint8_t family, uint64_t x) {
  uint8_t msg[9];
  msg[0] = family;
  auto enc = be64(x);
  std::memcpy(msg + 1, enc.data(), 8);
  return prf16(k, std::span<const uint8_t>(msg, 9));
}
}  // namespace

Label label_h1(const Key128& k_w, uint64_t counter) { return label_family(k_w, 1, counter); }
Label label_h2(const Key128& k_w, uint64_t counter) { return label_family(k_w, 2, counter); }
Label label_h3(const Key128& k_w, DocId id) { return label_family(k_w, 3, id); }

Label bunker_label(const Key128& k1, const std::string& keyword, uint64_t version,
                   uint64_t count) {
  if (keyword.empty()) throw std::invalid_argument("empty keyword");
  Bytes msg;
  msg.reserve(4 + keyword.size() + 16);
  put_u32le(msg, uint32_t(keyword.size()));
  msg.insert(msg.end(), keyword.begin(), keyword.end());
  auto v = be64(version), c = be64(count);
  msg.insert(msg.end(), v.begin(), v.end());
  msg.insert(msg.end(), c.begin(), c.end());
  return prf16(k1, msg);
}

Ciphertext encrypt(const Key128& key, std::span<const uint8_t> plaintext) {
  Ciphertext ct;
  if (RAND_bytes(ct.nonce.data(), int(ct.nonce.size())) != 1)
    throw std::runtime_error("RAND_bytes failed");
  thread_local CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(),
                                 ct.nonce.data()) != 1)
    throw std::runtime_error("GCM init failed");
  ct.body.resize(plaintext.size());
  int len = 0;
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), ct.body.data(), &len, plaintext.data(),
                        int(plaintext.size())) != 1)
    throw std::runtime_error("GCM encrypt failed");
  int fin = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), ct.body.data() + len, &fin) != 1)
    throw std::runtime_error("GCM final failed");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, int(ct.tag.size()),
                          ct.tag.data()) != 1)
    throw std::runtime_error("GCM tag failed");
  return ct;
}

Bytes decrypt(const Key128& key, const Ciphertext& ct) {
  // Reused across calls; a fresh DecryptInit_ex fully resets state, including
  // after a previous authentication failure.
  thread_local CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(),
                                 ct.nonce.data()) != 1)
    throw std::runtime_error("GCM init failed");
  Bytes pt(ct.body.size());
  int len = 0;
  if (!ct.body.empty() &&
      EVP_DecryptUpdate(ctx.get(), pt.data(), &len, ct.body.data(),
                        int(ct.body.size())) != 1)
    throw std::runtime_error("GCM decrypt failed");
  uint8_t tag[16];
  std::memcpy(tag, ct.tag.data(), 16);
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag) != 1)
    throw std::runtime_error("GCM set-tag failed");
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), pt.data() + len, &fin) != 1)
    throw AuthError("ciphertext authentication failed");
  return pt;
}

Bytes random_bytes(size_t n) {
  Bytes out(n);
  if (n && RAND_bytes(out.data(), int(n)) != 1)
    throw std::runtime_error("RAND_bytes failed");
  return out;
}

}  // namespace dsse::crypto
