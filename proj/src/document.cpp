#include "dsse/document.hpp"

namespace dsse {

Bytes encode_document(const std::vector<std::string>& keywords,
                      std::span<const uint8_t> body) {
  Bytes out;
  put_u32le(out, uint32_t(keywords.size()));
  for (const auto& w : keywords) {
    put_u32le(out, uint32_t(w.size()));
    out.insert(out.end(), w.begin(), w.end());
  }
  put_u64le(out, body.size());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Document decode_document(std::span<const uint8_t> blob) {
  Document doc;
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > blob.size()) throw std::invalid_argument("malformed document blob");
  };
  need(4);
  uint32_t count = get_u32le(blob.data() + pos);
  pos += 4;
  // Each keyword record is at least its 4-byte length prefix.
  if (uint64_t(count) * 4 > blob.size()) throw std::invalid_argument("malformed document blob");
  doc.keywords.reserve(count);
  for (uint32_t i = 0; i < count; i++) {
    need(4);
    uint32_t len = get_u32le(blob.data() + pos);
    pos += 4;
    need(len);
    doc.keywords.emplace_back(reinterpret_cast<const char*>(blob.data() + pos), len);
    pos += len;
  }
  need(8);
  uint64_t body_len = get_u64le(blob.data() + pos);
  pos += 8;
  need(body_len);
  doc.body.assign(blob.begin() + long(pos), blob.begin() + long(pos + body_len));
  return doc;
}

}  // namespace dsse
