#pragma once

#include <map>
#include <optional>
#include <set>

#include "dsse/bloom.hpp"
#include "dsse/boundary.hpp"
#include "dsse/types.hpp"

namespace dsse {

// Plaintext mirror of the encrypted database: the ground truth every scheme's
// observable behaviour is checked against. Timestamps are the global
// operation sequence number.
class OracleIndex {
 public:
  struct Event {
    enum class Kind : uint8_t { add, del, search } kind;
    uint64_t t;
    DocId id = 0;                       // add/del
    std::vector<std::string> keywords;  // add: the doc's keywords; del: ditto
    std::string query;                  // search
  };

  void oracle_add(DocId id, const std::vector<std::string>& keywords);
  void oracle_delete(DocId id);
  // Live ids containing the keyword, ascending. Recorded as a history event
  // because searches drive server-state transitions in every scheme.
  std::vector<DocId> oracle_search(const std::string& keyword);

  // (add-timestamp, id) for every pair added and never deleted.
  std::vector<std::pair<uint64_t, DocId>> time_db(const std::string& keyword) const;
  // Timestamps of all updates touching the keyword, ascending.
  std::vector<uint64_t> updates(const std::string& keyword) const;

  const std::vector<Event>& history() const { return history_; }
  uint64_t clock() const { return clock_; }
  size_t live_docs() const { return live_.size(); }

 private:
  uint64_t clock_ = 0;
  std::map<std::string, std::set<DocId>> postings_;
  std::map<DocId, std::vector<std::string>> live_;
  std::set<DocId> ever_added_;
  std::vector<Event> history_;
};

// Analytic call-count model: replays the oracle history under each scheme's
// batching rules and predicts the ledger, phase by phase. Byte fields are not
// modeled and stay zero — comparisons are on ecalls/ocalls.
//
// For the Bloom-filter scheme the number of state lookups depends on actual
// filter hits, false positives included; passing the filter geometry + key
// lets the model rebuild the filter insert-by-insert and predict exactly.
// Without it the model assumes a perfect filter.
LedgerSnapshot expected_ledger(const OracleIndex& idx, SchemeTag scheme,
                               uint64_t batch_size,
                               const std::optional<BloomParams>& bloom = std::nullopt);

PhaseCounters expected_counts(const OracleIndex& idx, SchemeTag scheme,
                              uint64_t batch_size, Phase phase,
                              const std::optional<BloomParams>& bloom = std::nullopt);

// ecall/ocall equality across all phases, ignoring the unmodeled byte fields.
bool counts_match(const LedgerSnapshot& predicted, const LedgerSnapshot& measured);

}  // namespace dsse
