#include "dsse/se1.hpp"

#include <algorithm>

#include "dsse/document.hpp"

namespace dsse {

namespace detail {

std::vector<std::string> normalize_keywords(const std::vector<std::string>& keywords) {
  std::vector<std::string> kws(keywords);
  std::sort(kws.begin(), kws.end());
  kws.erase(std::unique(kws.begin(), kws.end()), kws.end());
  for (const auto& w : kws)
    if (w.empty()) throw std::invalid_argument("empty keyword");
  return kws;
}

// Token generation + index/state construction shared by both lazy-deletion
// schemes. Returns the number of flush ocalls issued.
uint64_t add_document_common(const crypto::KeyBundle& keys, const BatchConfig& batch,
                             CallLedger& ledger, ServerStore& store,
                             std::map<std::string, uint64_t>& st, DocId id,
                             const std::vector<std::string>& keywords,
                             std::span<const uint8_t> body) {
  ledger.set_phase(Phase::update_add);
  uint64_t ecall_payload = 1 + 8 + body.size();
  for (const auto& w : keywords) ecall_payload += 4 + w.size();
  ledger.ecall(ecall_payload);

  // Client path: the encrypted document goes straight to the server.
  Bytes blob = encode_document(keywords, body);
  store.put_document(id, crypto::encrypt(keys.k_f, blob), Origin::client);

  UpdateBatch pending;
  pending.reserve(std::min<size_t>(keywords.size(), batch.batch_size));
  uint64_t flushes = 0;
  auto flush = [&] {
    if (pending.empty()) return;
    uint64_t bytes = 0;
    for (const auto& e : pending)
      bytes += 16 + e.id_ct.wire_size() + 16 + e.c_ct.wire_size();
    ledger.ocall(bytes);
    store.apply_update_batch(pending);
    pending.clear();
    flushes++;
  };

  for (const auto& w : keywords) {
    auto kk = crypto::derive_keyword_keys(keys.k_sigma, w);
    auto it = st.find(w);
    uint64_t c = it == st.end() ? 0 : it->second + 1;
    st[w] = c;

    UpdateEntry e;
    e.index_label = crypto::label_h1(kk.k_w, c);
    Bytes id_pt;
    put_u64le(id_pt, id);
    e.id_ct = crypto::encrypt(crypto::label_h2(kk.k_w, c), id_pt);
    e.state_label = crypto::label_h3(kk.k_w, id);
    Bytes c_pt;
    put_u64le(c_pt, c);
    e.c_ct = crypto::encrypt(kk.k_c, c_pt);
    pending.push_back(std::move(e));
    if (pending.size() == batch.batch_size) flush();
  }
  flush();
  return flushes;
}

// Phases shared from the token set onwards: build tokens for every counter
// not recovered as deleted, send them batched, resolve server-side, and
// decrypt the returned documents client-side.
SearchResult finish_search(const crypto::KeyBundle& keys, const BatchConfig& batch,
                           CallLedger& ledger, ServerStore& store,
                           const crypto::KeywordKeys& kk, uint64_t latest_counter,
                           const std::set<uint64_t>& recovered_counters) {
  QueryTokenList tokens;
  for (uint64_t c = 0; c <= latest_counter; c++) {
    if (recovered_counters.count(c)) continue;
    tokens.push_back({crypto::label_h1(kk.k_w, c), crypto::label_h2(kk.k_w, c)});
  }
  batched_ocalls(ledger, tokens.size(), batch.batch_size, 32);

  SearchResult result;
  for (auto& [id, ct] : store.resolve_query(tokens)) {
    result.ids.push_back(id);
    Document doc = decode_document(crypto::decrypt(keys.k_f, ct));
    result.docs.push_back(std::move(doc.body));
  }
  return result;
}

}  // namespace detail

Bytes Se1EnclaveState::serialize() const {
  Bytes out;
  out.push_back(1);
  put_u64le(out, st.size());
  for (const auto& [w, c] : st) {
    out.push_back(uint8_t(w.size()));
    out.insert(out.end(), w.begin(), w.end());
    put_u64le(out, c);
  }
  put_u64le(out, d.size());
  for (DocId id : d) put_u64le(out, id);
  put_u64le(out, dmap.size());
  for (const auto& [w, ids] : dmap) {
    out.push_back(uint8_t(w.size()));
    out.insert(out.end(), w.begin(), w.end());
    put_u64le(out, ids.size());
    for (DocId id : ids) put_u64le(out, id);
  }
  return out;
}

Se1Session::Se1Session(crypto::KeyBundle keys, BatchConfig batch)
    : keys_(keys), batch_(batch), store_(&ledger_) {
  if (batch_.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  ledger_.set_phase(Phase::setup);
  ledger_.ecall(sizeof keys_.k_sigma + sizeof keys_.k_f);  // key provisioning
}

void Se1Session::add(DocId id, const std::vector<std::string>& keywords,
                     std::span<const uint8_t> body) {
  if (added_.count(id)) throw std::invalid_argument("document id already added");
  auto kws = detail::normalize_keywords(keywords);
  added_.insert(id);
  detail::add_document_common(keys_, batch_, ledger_, store_, enclave_.st, id, kws,
                              body);
}

void Se1Session::del(DocId id) {
  if (!added_.count(id)) throw std::invalid_argument("unknown document id");
  if (deleted_.count(id)) throw std::invalid_argument("document already deleted");
  deleted_.insert(id);
  ledger_.set_phase(Phase::update_del);
  ledger_.ecall(1 + 8);
  enclave_.d.push_back(id);
}

SearchResult Se1Session::search(const std::string& keyword) {
  auto kk = crypto::derive_keyword_keys(keys_.k_sigma, keyword);
  ledger_.set_phase(Phase::search);
  ledger_.ecall(1 + 4 + keyword.size());

  auto st_it = enclave_.st.find(keyword);
  if (st_it == enclave_.st.end()) return {};

  // (i) Resolve queued deletions: pull each deleted document into the
  // enclave, spread its id over dmap for every keyword it held, and delete it
  // physically. One ocall per document, deletion piggybacked.
  for (DocId id : enclave_.d) {
    auto ct = store_.get_document(id, Origin::enclave);
    if (!ct) throw IntegrityError("queued deletion points at a missing document");
    ledger_.ocall(8, ct->wire_size());
    Document doc = decode_document(crypto::decrypt(keys_.k_f, *ct));
    for (const auto& w : doc.keywords) enclave_.dmap[w].push_back(id);
    store_.delete_document(id, Origin::enclave);
  }
  enclave_.d.clear();

  // (ii) Recover the deleted counters for this keyword from the state map,
  // consuming the entries. Lookups travel in batches.
  std::set<uint64_t> recovered;
  auto dmap_it = enclave_.dmap.find(keyword);
  if (dmap_it != enclave_.dmap.end()) {
    const auto& ids = dmap_it->second;
    for (size_t start = 0; start < ids.size(); start += batch_.batch_size) {
      size_t n = std::min<size_t>(batch_.batch_size, ids.size() - start);
      uint64_t response = 0;
      for (size_t i = start; i < start + n; i++) {
        Label u = crypto::label_h3(kk.k_w, ids[i]);
        auto ct = store_.get_state(u, Origin::enclave);
        if (!ct) throw IntegrityError("missing state entry for a deleted document");
        response += ct->wire_size();
        Bytes c_pt = crypto::decrypt(kk.k_c, *ct);
        if (c_pt.size() != 8) throw IntegrityError("malformed state entry");
        recovered.insert(get_u64le(c_pt.data()));
        store_.delete_state(u, Origin::enclave);
      }
      ledger_.ocall(n * 16, response);
    }
  }

  // (iii)+(iv) Tokens for the remaining counters, server resolution.
  SearchResult result = detail::finish_search(keys_, batch_, ledger_, store_, kk,
                                              st_it->second, recovered);
  enclave_.dmap.erase(keyword);
  return result;
}

}  // namespace dsse
