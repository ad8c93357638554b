#include "dsse/oracle.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace dsse {

void OracleIndex::oracle_add(DocId id, const std::vector<std::string>& keywords) {
  if (ever_added_.count(id)) throw std::invalid_argument("document id already added");
  std::vector<std::string> kws(keywords);
  std::sort(kws.begin(), kws.end());
  kws.erase(std::unique(kws.begin(), kws.end()), kws.end());
  for (const auto& w : kws)
    if (w.empty()) throw std::invalid_argument("empty keyword");
  ever_added_.insert(id);
  clock_++;
  for (const auto& w : kws) postings_[w].insert(id);
  live_[id] = kws;
  history_.push_back({Event::Kind::add, clock_, id, std::move(kws), {}});
}

void OracleIndex::oracle_delete(DocId id) {
  auto it = live_.find(id);
  if (it == live_.end())
    throw std::invalid_argument("deleting a document that is not live");
  clock_++;
  for (const auto& w : it->second) {
    auto p = postings_.find(w);
    p->second.erase(id);
    if (p->second.empty()) postings_.erase(p);
  }
  history_.push_back({Event::Kind::del, clock_, id, std::move(it->second), {}});
  live_.erase(it);
}

std::vector<DocId> OracleIndex::oracle_search(const std::string& keyword) {
  clock_++;
  history_.push_back({Event::Kind::search, clock_, 0, {}, keyword});
  auto it = postings_.find(keyword);
  if (it == postings_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<std::pair<uint64_t, DocId>> OracleIndex::time_db(
    const std::string& keyword) const {
  std::map<DocId, uint64_t> added_at;
  for (const auto& ev : history_) {
    if (ev.kind == Event::Kind::search) continue;
    if (!std::binary_search(ev.keywords.begin(), ev.keywords.end(), keyword)) continue;
    if (ev.kind == Event::Kind::add)
      added_at[ev.id] = ev.t;
    else
      added_at.erase(ev.id);
  }
  std::vector<std::pair<uint64_t, DocId>> out;
  out.reserve(added_at.size());
  for (auto [id, t] : added_at) out.emplace_back(t, id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<uint64_t> OracleIndex::updates(const std::string& keyword) const {
  std::vector<uint64_t> out;
  for (const auto& ev : history_) {
    if (ev.kind == Event::Kind::search) continue;
    if (std::binary_search(ev.keywords.begin(), ev.keywords.end(), keyword))
      out.push_back(ev.t);
  }
  return out;
}

namespace {

struct Acc {
  std::array<PhaseCounters, kPhaseCount> phases{};
  PhaseCounters& operator[](Phase p) { return phases[size_t(p)]; }
};

// Lazy-deletion schemes share the add/delete shape; the search shape differs
// in how queued deletions are resolved.
LedgerSnapshot replay_lazy(const OracleIndex& idx, bool bloom_variant,
                           uint64_t batch, const std::optional<BloomParams>& bloom) {
  Acc acc;
  acc[Phase::setup].ecalls = 1;

  std::unordered_map<std::string, uint64_t> st;       // latest counter
  std::unordered_map<DocId, std::set<std::string>> docs;
  std::vector<DocId> d;                               // queued deletions
  std::unordered_map<std::string, uint64_t> pending;  // deleted, state unconsumed
  std::unordered_map<std::string, std::vector<DocId>> dmap;
  std::optional<BloomFilter> filter;
  if (bloom_variant && bloom) filter.emplace(*bloom);

  for (const auto& ev : idx.history()) {
    switch (ev.kind) {
      case OracleIndex::Event::Kind::add: {
        acc[Phase::update_add].ecalls++;
        acc[Phase::update_add].ocalls += ceil_div(ev.keywords.size(), batch);
        for (const auto& w : ev.keywords) {
          auto it = st.find(w);
          st[w] = it == st.end() ? 0 : it->second + 1;
          if (filter) filter->insert(w, ev.id);
        }
        docs[ev.id] = {ev.keywords.begin(), ev.keywords.end()};
        break;
      }
      case OracleIndex::Event::Kind::del: {
        acc[Phase::update_del].ecalls++;
        d.push_back(ev.id);
        if (bloom_variant)
          for (const auto& w : ev.keywords) pending[w]++;
        break;
      }
      case OracleIndex::Event::Kind::search: {
        acc[Phase::search].ecalls++;
        auto st_it = st.find(ev.query);
        if (st_it == st.end()) break;
        uint64_t ocalls = 0;
        uint64_t recovered = 0;
        if (bloom_variant) {
          uint64_t hits = 0;
          for (DocId id : d) {
            bool hit = filter ? filter->contains(ev.query, id)
                              : docs[id].count(ev.query) != 0;
            if (hit) hits++;
          }
          ocalls += ceil_div(hits, batch);
          recovered = pending[ev.query];
          pending.erase(ev.query);
        } else {
          ocalls += d.size();  // one document fetch each
          for (DocId id : d)
            for (const auto& w : docs[id]) dmap[w].push_back(id);
          d.clear();
          recovered = dmap[ev.query].size();
          ocalls += ceil_div(recovered, batch);
          dmap.erase(ev.query);
        }
        uint64_t tokens = st_it->second + 1 - recovered;
        ocalls += ceil_div(tokens, batch);
        acc[Phase::search].ocalls += ocalls;
        break;
      }
    }
  }
  LedgerSnapshot out;
  out.phases = acc.phases;
  return out;
}

LedgerSnapshot replay_bunker(const OracleIndex& idx, uint64_t batch) {
  Acc acc;
  acc[Phase::setup].ecalls = 1;

  // Per keyword: records written under the current version.
  std::unordered_map<std::string, std::vector<std::pair<DocId, bool>>> records;

  for (const auto& ev : idx.history()) {
    switch (ev.kind) {
      case OracleIndex::Event::Kind::add:
        acc[Phase::update_add].ecalls += ev.keywords.size();
        acc[Phase::update_add].ocalls += ev.keywords.size();
        for (const auto& w : ev.keywords) records[w].emplace_back(ev.id, false);
        break;
      case OracleIndex::Event::Kind::del:
        acc[Phase::update_del].ecalls += ev.keywords.size();
        acc[Phase::update_del].ocalls += ev.keywords.size();
        for (const auto& w : ev.keywords) records[w].emplace_back(ev.id, true);
        break;
      case OracleIndex::Event::Kind::search: {
        acc[Phase::search].ecalls++;
        auto it = records.find(ev.query);
        uint64_t count = it == records.end() ? 0 : it->second.size();
        if (count == 0) break;
        std::unordered_set<DocId> dels;
        for (const auto& [id, is_del] : it->second)
          if (is_del) dels.insert(id);
        std::vector<std::pair<DocId, bool>> survivors;
        std::unordered_set<DocId> seen;
        for (const auto& [id, is_del] : it->second)
          if (!is_del && !dels.count(id) && seen.insert(id).second)
            survivors.emplace_back(id, false);
        acc[Phase::search].ocalls +=
            ceil_div(count, batch) + ceil_div(survivors.size(), batch);
        it->second = std::move(survivors);
        break;
      }
    }
  }
  LedgerSnapshot out;
  out.phases = acc.phases;
  return out;
}

}  // namespace

LedgerSnapshot expected_ledger(const OracleIndex& idx, SchemeTag scheme,
                               uint64_t batch_size,
                               const std::optional<BloomParams>& bloom) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  switch (scheme) {
    case SchemeTag::bunker_b: return replay_bunker(idx, batch_size);
    case SchemeTag::sgx_se1: return replay_lazy(idx, false, batch_size, std::nullopt);
    case SchemeTag::sgx_se2: return replay_lazy(idx, true, batch_size, bloom);
  }
  throw std::invalid_argument("unknown scheme");
}

PhaseCounters expected_counts(const OracleIndex& idx, SchemeTag scheme,
                              uint64_t batch_size, Phase phase,
                              const std::optional<BloomParams>& bloom) {
  return expected_ledger(idx, scheme, batch_size, bloom)[phase];
}

bool counts_match(const LedgerSnapshot& predicted, const LedgerSnapshot& measured) {
  for (int i = 0; i < kPhaseCount; i++) {
    if (predicted.phases[i].ecalls != measured.phases[i].ecalls ||
        predicted.phases[i].ocalls != measured.phases[i].ocalls)
      return false;
  }
  return true;
}

}  // namespace dsse
