#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsse {

using Bytes = std::vector<uint8_t>;
using Key128 = std::array<uint8_t, 16>;
using Label = std::array<uint8_t, 16>;
using DocId = uint64_t;

// Thrown when a decryption tag check fails.
struct AuthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when server-side structures are inconsistent with the protocol
// (label reuse, missing state that must exist, undecryptable index entries).
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SchemeTag { bunker_b, sgx_se1, sgx_se2 };

inline const char* to_string(SchemeTag s) {
  switch (s) {
    case SchemeTag::bunker_b: return "bunker-b";
    case SchemeTag::sgx_se1: return "sgx-se1";
    case SchemeTag::sgx_se2: return "sgx-se2";
  }
  return "?";
}

inline SchemeTag scheme_from_string(const std::string& s) {
  if (s == "bunker-b") return SchemeTag::bunker_b;
  if (s == "sgx-se1") return SchemeTag::sgx_se1;
  if (s == "sgx-se2") return SchemeTag::sgx_se2;
  throw std::invalid_argument("unknown scheme tag: " + s);
}

// Search output. ids are the live documents for the queried keyword, in
// server resolution order. The index-only scheme leaves docs empty; the
// document-storing schemes return decrypted bodies aligned with ids.
struct SearchResult {
  std::vector<DocId> ids;
  std::vector<Bytes> docs;
};

inline void put_u32le(Bytes& out, uint32_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 24));
}

inline void put_u64le(Bytes& out, uint64_t v) {
  for (int i = 0; i < 8; i++) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint32_t get_u32le(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

inline uint64_t get_u64le(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; i--) v = v << 8 | p[i];
  return v;
}

// Big-endian 8-byte encoding used for counters and ids inside PRF inputs.
inline std::array<uint8_t, 8> be64(uint64_t v) {
  std::array<uint8_t, 8> out;
  for (int i = 7; i >= 0; i--) {
    out[i] = uint8_t(v);
    v >>= 8;
  }
  return out;
}

inline std::string hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

inline uint64_t ceil_div(uint64_t n, uint64_t d) { return n ? (n - 1) / d + 1 : 0; }

}  // namespace dsse
