#include "dsse/se2.hpp"

#include <sstream>

namespace dsse {

namespace {
BloomParams with_key(BloomParams p, const Key128& k) {
  p.key = k;
  return p;
}
}  // namespace

Se2Session::Se2Session(crypto::KeyBundle keys, BloomParams params, BatchConfig batch)
    : keys_(keys), batch_(batch), store_(&ledger_),
      filter_(with_key(params, keys.k_bf)) {
  if (batch_.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  ledger_.set_phase(Phase::setup);
  // Keys plus filter geometry cross into the enclave once.
  ledger_.ecall(sizeof keys_.k_sigma + sizeof keys_.k_f + sizeof keys_.k_bf + 12);
}

void Se2Session::add(DocId id, const std::vector<std::string>& keywords,
                     std::span<const uint8_t> body) {
  if (added_.count(id)) throw std::invalid_argument("document id already added");
  auto kws = detail::normalize_keywords(keywords);
  added_.insert(id);
  detail::add_document_common(keys_, batch_, ledger_, store_, st_, id, kws, body);
  for (const auto& w : kws) filter_.insert(w, id);
}

void Se2Session::del(DocId id) {
  if (!added_.count(id)) throw std::invalid_argument("unknown document id");
  if (deleted_.count(id)) throw std::invalid_argument("document already deleted");
  deleted_.insert(id);
  ledger_.set_phase(Phase::update_del);
  ledger_.ecall(1 + 8);
  d_.push_back(id);
}

SearchResult Se2Session::search(const std::string& keyword) {
  auto kk = crypto::derive_keyword_keys(keys_.k_sigma, keyword);
  ledger_.set_phase(Phase::search);
  ledger_.ecall(1 + 4 + keyword.size());

  auto st_it = st_.find(keyword);
  if (st_it == st_.end()) return {};

  // (i) Probe the filter for every queued deletion; for hits, fetch and
  // consume the state entry (batched) and physically delete the document. A
  // hit whose state entry is already gone was consumed by an earlier search
  // of this keyword (or is a filter false positive) and is skipped. The
  // deletion list itself is kept forever.
  std::vector<DocId> hits;
  for (DocId id : d_)
    if (filter_.contains(keyword, id)) hits.push_back(id);

  std::set<uint64_t> recovered;
  for (size_t start = 0; start < hits.size(); start += batch_.batch_size) {
    size_t n = std::min<size_t>(batch_.batch_size, hits.size() - start);
    uint64_t response = 0;
    for (size_t i = start; i < start + n; i++) {
      Label u = crypto::label_h3(kk.k_w, hits[i]);
      auto ct = store_.get_state(u, Origin::enclave);
      if (!ct) continue;
      response += ct->wire_size();
      Bytes c_pt = crypto::decrypt(kk.k_c, *ct);
      if (c_pt.size() != 8) throw IntegrityError("malformed state entry");
      recovered.insert(get_u64le(c_pt.data()));
      store_.delete_state(u, Origin::enclave);
      store_.delete_document(hits[i], Origin::enclave);
    }
    ledger_.ocall(n * 16, response);
  }

  return detail::finish_search(keys_, batch_, ledger_, store_, kk, st_it->second,
                               recovered);
}

Bytes Se2Session::enclave_snapshot() const {
  Bytes out;
  out.push_back(2);
  put_u64le(out, st_.size());
  for (const auto& [w, c] : st_) {
    out.push_back(uint8_t(w.size()));
    out.insert(out.end(), w.begin(), w.end());
    put_u64le(out, c);
  }
  put_u64le(out, d_.size());
  for (DocId id : d_) put_u64le(out, id);
  std::ostringstream bf;
  filter_.serialize(bf);
  auto s = bf.str();
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace dsse
