#pragma once

#include <optional>
#include <unordered_map>

#include "dsse/boundary.hpp"
#include "dsse/crypto.hpp"
#include "dsse/types.hpp"

namespace dsse {

struct LabelHash {
  size_t operator()(const Label& l) const {
    uint64_t x;
    std::memcpy(&x, l.data(), 8);
    return size_t(x);
  }
};

// One paired update flushed from the enclave: an index entry (points at a
// document id) and a state entry (hides the per-keyword counter).
struct UpdateEntry {
  Label index_label;        // H1(k_w, c)
  crypto::Ciphertext id_ct; // Enc(k_id, id)
  Label state_label;        // H3(k_w, id)
  crypto::Ciphertext c_ct;  // Enc(k_c, c)
};

using UpdateBatch = std::vector<UpdateEntry>;

// Token pair the enclave issues per candidate counter: where to look in the
// index and the key that opens that entry.
struct QueryToken {
  Label index_label;  // H1(k_w, c)
  Key128 k_id;        // H2(k_w, c), used as the entry decryption key
};

using QueryTokenList = std::vector<QueryToken>;

// Untrusted in-memory maps: encrypted index M_I, encrypted state M_c, and the
// document repository R. Every access is reported to the attached ledger's
// trace; the store itself never sees a secret key except the per-query k_id
// handed over in tokens.
class ServerStore {
 public:
  explicit ServerStore(CallLedger* ledger = nullptr) : ledger_(ledger) {}

  // Applies paired index/state writes. A label already present (in the map or
  // twice within the batch) signals counter reuse and raises IntegrityError.
  void apply_update_batch(const UpdateBatch& batch);

  void put_document(DocId id, crypto::Ciphertext doc, Origin origin = Origin::client);
  std::optional<crypto::Ciphertext> get_document(DocId id, Origin origin = Origin::enclave) const;
  // Deleting an absent document is a no-op.
  void delete_document(DocId id, Origin origin = Origin::enclave);

  std::optional<crypto::Ciphertext> get_state(const Label& label,
                                              Origin origin = Origin::enclave) const;
  void delete_state(const Label& label, Origin origin = Origin::enclave);

  // Index lookups for a token list, in token order: decrypt the id with the
  // token's key, fetch the document. Tokens whose index entry is absent and
  // ids whose document is gone are skipped. An index entry that fails
  // authentication under its token key raises IntegrityError.
  std::vector<std::pair<DocId, crypto::Ciphertext>> resolve_query(
      const QueryTokenList& tokens) const;

  // Version-labelled scheme: single-entry index write.
  void bunker_apply(const Label& label, crypto::Ciphertext value);
  // Consume-on-search: returns the (label, value) pairs present among tokens,
  // in token order, removing them from the index.
  std::vector<std::pair<Label, crypto::Ciphertext>> bunker_search(
      const std::vector<Label>& tokens);

  size_t index_size() const { return m_i_.size(); }
  size_t state_size() const { return m_c_.size(); }
  size_t document_count() const { return r_.size(); }
  bool index_has(const Label& l) const { return m_i_.count(l) != 0; }
  // Total resident bytes across the three maps (labels/ids + ciphertexts),
  // maintained incrementally so per-operation sampling stays O(1).
  uint64_t byte_size() const { return bytes_; }

  // One file per map (index.bin, state.bin, documents.bin), little-endian
  // (length, label, length, ciphertext) records.
  void snapshot_to(const std::string& dir) const;
  void restore_from(const std::string& dir);

 private:
  void record(StoreTag tag, AccessOp op, Origin origin, std::span<const uint8_t> label,
              uint32_t vsize, const Bytes* value = nullptr) const;

  CallLedger* ledger_;
  std::unordered_map<Label, crypto::Ciphertext, LabelHash> m_i_;
  std::unordered_map<Label, crypto::Ciphertext, LabelHash> m_c_;
  std::unordered_map<DocId, crypto::Ciphertext> r_;
  uint64_t bytes_ = 0;
};

}  // namespace dsse
