#pragma once

#include "dsse/bloom.hpp"
#include "dsse/se1.hpp"

namespace dsse {

// Variant of the lazy-deletion scheme that replaces document caching with a
// keyed Bloom filter over (keyword, id) pairs: searches probe the filter for
// every queued deletion instead of fetching documents, so no document bytes
// ever cross back into the enclave. The deletion list is never drained.
class Se2Session {
 public:
  // params.key is overwritten with the bundle's filter key.
  Se2Session(crypto::KeyBundle keys, BloomParams params, BatchConfig batch = {});

  void add(DocId id, const std::vector<std::string>& keywords,
           std::span<const uint8_t> body);
  void del(DocId id);
  SearchResult search(const std::string& keyword);

  CallLedger& ledger() { return ledger_; }
  const CallLedger& ledger() const { return ledger_; }
  ServerStore& store() { return store_; }
  const ServerStore& store() const { return store_; }
  const std::map<std::string, uint64_t>& st() const { return st_; }
  const std::vector<DocId>& deletion_list() const { return d_; }
  const BloomFilter& filter() const { return filter_; }
  const crypto::KeyBundle& keys() const { return keys_; }

  // Serialized enclave residency: st + deletion list + filter. This is the
  // whole persistent enclave footprint.
  Bytes enclave_snapshot() const;

 private:
  crypto::KeyBundle keys_;
  BatchConfig batch_;
  CallLedger ledger_;
  ServerStore store_;
  std::map<std::string, uint64_t> st_;
  std::vector<DocId> d_;
  BloomFilter filter_;
  std::unordered_set<DocId> added_, deleted_;  // client-side precondition books
};

}  // namespace dsse
