#include "dsse/bloom.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "dsse/crypto.hpp"

namespace dsse {

BloomParams estimate_params(uint64_t n, double p) {
  if (n < 1) throw std::invalid_argument("bloom: n must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bloom: p must be in (0,1)");
  const double ln2 = std::log(2.0);
  double raw_bits = -double(n) * std::log(p) / (ln2 * ln2);
  BloomParams out;
  out.bits = std::max<uint64_t>(8, uint64_t(std::ceil(raw_bits)));
  double h = std::round(double(out.bits) / double(n) * ln2);
  out.hashes = uint32_t(std::min(32.0, std::max(1.0, h)));
  out.target_fp = p;
  return out;
}

BloomFilter::BloomFilter(BloomParams params) : params_(params) {
  if (params_.bits < 8) throw std::invalid_argument("bloom: bits must be >= 8");
  if (params_.hashes < 1 || params_.hashes > 32)
    throw std::invalid_argument("bloom: hashes must be in [1,32]");
  bits_.assign((params_.bits + 7) / 8, 0);
}

uint64_t BloomFilter::position(uint32_t probe, const std::string& keyword,
                               DocId id) const {
  Bytes msg;
  msg.reserve(1 + 4 + keyword.size() + 8);
  msg.push_back(uint8_t(probe));
  put_u32le(msg, uint32_t(keyword.size()));
  msg.insert(msg.end(), keyword.begin(), keyword.end());
  auto enc = be64(id);
  msg.insert(msg.end(), enc.begin(), enc.end());
  Label digest = crypto::prf16(params_.key, msg);
  uint64_t x = 0;
  for (int i = 0; i < 8; i++) x = x << 8 | digest[i];
  return x % params_.bits;
}

void BloomFilter::insert(const std::string& keyword, DocId id) {
  for (uint32_t j = 1; j <= params_.hashes; j++) {
    uint64_t pos = position(j, keyword, id);
    bits_[pos >> 3] |= uint8_t(1u << (pos & 7));
  }
  inserted_++;
}

bool BloomFilter::contains(const std::string& keyword, DocId id) const {
  for (uint32_t j = 1; j <= params_.hashes; j++) {
    uint64_t pos = position(j, keyword, id);
    if (!(bits_[pos >> 3] & (1u << (pos & 7)))) return false;
  }
  return true;
}

uint64_t BloomFilter::popcount() const {
  uint64_t n = 0;
  for (uint8_t b : bits_) n += uint64_t(__builtin_popcount(b));
  return n;
}

void BloomFilter::serialize(std::ostream& out) const {
  Bytes header;
  put_u64le(header, params_.bits);
  put_u32le(header, params_.hashes);
  header.insert(header.end(), params_.key.begin(), params_.key.end());
  uint64_t fp_bits;
  static_assert(sizeof fp_bits == sizeof params_.target_fp);
  std::memcpy(&fp_bits, &params_.target_fp, 8);
  put_u64le(header, fp_bits);
  put_u64le(header, inserted_);
  out.write(reinterpret_cast<const char*>(header.data()), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(bits_.data()), std::streamsize(bits_.size()));
}

BloomFilter BloomFilter::deserialize(std::istream& in) {
  uint8_t header[44];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in) throw std::invalid_argument("bloom: truncated header");
  BloomParams p;
  p.bits = get_u64le(header);
  p.hashes = get_u32le(header + 8);
  std::memcpy(p.key.data(), header + 12, 16);
  uint64_t fp_bits = get_u64le(header + 28);
  std::memcpy(&p.target_fp, &fp_bits, 8);
  uint64_t inserted = get_u64le(header + 36);
  BloomFilter bf(p);
  in.read(reinterpret_cast<char*>(bf.bits_.data()), std::streamsize(bf.bits_.size()));
  if (!in) throw std::invalid_argument("bloom: truncated bit vector");
  bf.inserted_ = inserted;
  return bf;
}

}  // namespace dsse
