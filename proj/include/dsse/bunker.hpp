#pragma once

#include <map>

#include "dsse/boundary.hpp"
#include "dsse/crypto.hpp"
#include "dsse/se1.hpp"  // BatchConfig
#include "dsse/store.hpp"

namespace dsse {

enum class UpdateOp : uint8_t { add = 0, del = 1 };

// Per-keyword client state: current re-encryption version and the number of
// index entries written under it.
struct BunkerClientState {
  std::map<std::string, std::pair<uint64_t, uint64_t>> st;  // w -> (version, count)
};

// Index-only scheme with per-pair updates. Deletions insert del records; a
// search consumes every entry of the current version, filters deleted ids
// inside the enclave, and re-inserts the survivors under version+1 with the
// counter starting over at 1. The enclave keeps nothing between calls.
class BunkerSession {
 public:
  explicit BunkerSession(crypto::KeyBundle keys, BatchConfig batch = {});

  // One ecall and one ocall per pair. Deletes of pairs that were never added
  // are accepted (they simply produce a del record).
  void update(UpdateOp op, const std::string& keyword, DocId id);
  void add_document(DocId id, const std::vector<std::string>& keywords);
  void delete_document(DocId id, const std::vector<std::string>& keywords);

  // ids of live documents for the keyword, in first-insertion order. The
  // scheme stores no document payloads, so docs stays empty.
  SearchResult search(const std::string& keyword);

  CallLedger& ledger() { return ledger_; }
  const CallLedger& ledger() const { return ledger_; }
  ServerStore& store() { return store_; }
  const ServerStore& store() const { return store_; }
  const BunkerClientState& client_state() const { return client_; }
  const crypto::KeyBundle& keys() const { return keys_; }

 private:
  crypto::KeyBundle keys_;
  BatchConfig batch_;
  CallLedger ledger_;
  ServerStore store_;
  BunkerClientState client_;
};

}  // namespace dsse
