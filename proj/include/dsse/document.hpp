#pragma once

#include "dsse/types.hpp"

namespace dsse {

// Documents are stored self-describing so a fetched ciphertext can be parsed
// back into its keyword set without client help: keyword count, then
// length-prefixed keywords, then the raw body.
struct Document {
  std::vector<std::string> keywords;
  Bytes body;
};

Bytes encode_document(const std::vector<std::string>& keywords,
                      std::span<const uint8_t> body);
Document decode_document(std::span<const uint8_t> blob);

}  // namespace dsse
