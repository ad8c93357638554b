#pragma once

#include <map>
#include <set>
#include <unordered_set>

#include "dsse/boundary.hpp"
#include "dsse/crypto.hpp"
#include "dsse/store.hpp"
#include "dsse/types.hpp"

namespace dsse {

struct BatchConfig {
  uint64_t batch_size = 100000;
};

// Enclave-resident state for the document-caching scheme: per-keyword
// counters, ids deleted since the last search, and the per-keyword deleted-id
// map rebuilt from cached documents during search.
struct Se1EnclaveState {
  std::map<std::string, uint64_t> st;  // keyword -> latest counter (0-based)
  std::vector<DocId> d;                // deletions not yet processed by a search
  std::map<std::string, std::vector<DocId>> dmap;

  Bytes serialize() const;
};

// Forward/backward-private scheme that resolves deletions lazily: deletes
// only queue an id; the first search afterwards pulls each deleted document
// into the enclave (one ocall per document), distributes its id into dmap for
// every keyword it contained, physically deletes it, and then excludes the
// recovered counters from the query token set.
class Se1Session {
 public:
  explicit Se1Session(crypto::KeyBundle keys, BatchConfig batch = {});

  // One ecall carrying the plaintext document; the encrypted document travels
  // client->server outside the boundary; index/state entries are flushed in
  // ceil(|keywords|/batch_size) ocalls.
  void add(DocId id, const std::vector<std::string>& keywords,
           std::span<const uint8_t> body);
  // One ecall, no ocalls.
  void del(DocId id);
  SearchResult search(const std::string& keyword);

  CallLedger& ledger() { return ledger_; }
  const CallLedger& ledger() const { return ledger_; }
  ServerStore& store() { return store_; }
  const ServerStore& store() const { return store_; }
  const Se1EnclaveState& enclave() const { return enclave_; }
  const crypto::KeyBundle& keys() const { return keys_; }
  Bytes enclave_snapshot() const { return enclave_.serialize(); }

 private:
  crypto::KeyBundle keys_;
  BatchConfig batch_;
  CallLedger ledger_;
  ServerStore store_;
  Se1EnclaveState enclave_;
  // Client-side books that enforce add/delete preconditions; not enclave state.
  std::unordered_set<DocId> added_, deleted_;
};

// Shared by both lazy-deletion schemes (internal).
namespace detail {
std::vector<std::string> normalize_keywords(const std::vector<std::string>& keywords);
uint64_t add_document_common(const crypto::KeyBundle& keys, const BatchConfig& batch,
                             CallLedger& ledger, ServerStore& store,
                             std::map<std::string, uint64_t>& st, DocId id,
                             const std::vector<std::string>& keywords,
                             std::span<const uint8_t> body);
SearchResult finish_search(const crypto::KeyBundle& keys, const BatchConfig& batch,
                           CallLedger& ledger, ServerStore& store,
                           const crypto::KeywordKeys& kk, uint64_t latest_counter,
                           const std::set<uint64_t>& recovered_counters);
}  // namespace detail

}  // namespace dsse
