#pragma once

#include <iosfwd>

#include "dsse/types.hpp"

namespace dsse {

struct BloomParams {
  uint64_t bits = 8;    // b, at least 8
  uint32_t hashes = 1;  // h, in [1, 32]
  Key128 key{};         // keyed hashing; set by the owner after estimation
  double target_fp = 0.0;

  bool operator==(const BloomParams&) const = default;
};

// Optimal sizing for n expected insertions at false-positive rate p:
//   b = ceil(-n * ln p / (ln 2)^2),  h = max(1, round((b / n) * ln 2)),
// with b clamped up to 8 and h clamped into [1, 32]. The key is left zeroed.
BloomParams estimate_params(uint64_t n, double p);

// Membership filter over (keyword, id) pairs. Position j (1-based) is
// HMAC(key, j || len(w) || w || id) mod b, so the h probe functions are one
// keyed hash domain-separated by the probe index.
class BloomFilter {
 public:
  explicit BloomFilter(BloomParams params);

  void insert(const std::string& keyword, DocId id);
  bool contains(const std::string& keyword, DocId id) const;

  const BloomParams& params() const { return params_; }
  uint64_t inserted_count() const { return inserted_; }
  // Bit i lives in byte i/8 at bit i%8 (little-endian bit order).
  const Bytes& bit_bytes() const { return bits_; }
  uint64_t popcount() const;

  void serialize(std::ostream& out) const;
  static BloomFilter deserialize(std::istream& in);

  size_t byte_size() const { return bits_.size(); }

 private:
  uint64_t position(uint32_t probe, const std::string& keyword, DocId id) const;

  BloomParams params_;
  Bytes bits_;
  uint64_t inserted_ = 0;
};

}  // namespace dsse
