#include "dsse/bunker.hpp"

#include <unordered_set>

namespace dsse {

namespace {

crypto::Ciphertext seal_record(const Key128& k2, DocId id, UpdateOp op) {
  Bytes pt;
  put_u64le(pt, id);
  pt.push_back(uint8_t(op));
  return crypto::encrypt(k2, pt);
}

std::pair<DocId, UpdateOp> open_record(const Key128& k2, const crypto::Ciphertext& ct) {
  Bytes pt;
  try {
    pt = crypto::decrypt(k2, ct);
  } catch (const AuthError&) {
    throw IntegrityError("index record does not authenticate");
  }
  if (pt.size() != 9 || pt[8] > 1)
    throw IntegrityError("index record decodes to a malformed update");
  return {get_u64le(pt.data()), UpdateOp(pt[8])};
}

}  // namespace

BunkerSession::BunkerSession(crypto::KeyBundle keys, BatchConfig batch)
    : keys_(keys), batch_(batch), store_(&ledger_) {
  if (batch_.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  ledger_.set_phase(Phase::setup);
  ledger_.ecall(sizeof keys_.k1 + sizeof keys_.k2);
}

void BunkerSession::update(UpdateOp op, const std::string& keyword, DocId id) {
  if (keyword.empty()) throw std::invalid_argument("empty keyword");
  auto& [version, count] = client_.st[keyword];
  ledger_.set_phase(op == UpdateOp::add ? Phase::update_add : Phase::update_del);
  ledger_.ecall(1 + 4 + keyword.size() + 8 + 8 + 8);

  Label u = crypto::bunker_label(keys_.k1, keyword, version, count + 1);
  crypto::Ciphertext v = seal_record(keys_.k2, id, op);
  ledger_.ocall(16 + v.wire_size());
  store_.bunker_apply(u, std::move(v));
  count++;
}

void BunkerSession::add_document(DocId id, const std::vector<std::string>& keywords) {
  for (const auto& w : detail::normalize_keywords(keywords))
    update(UpdateOp::add, w, id);
}

void BunkerSession::delete_document(DocId id, const std::vector<std::string>& keywords) {
  for (const auto& w : detail::normalize_keywords(keywords))
    update(UpdateOp::del, w, id);
}

SearchResult BunkerSession::search(const std::string& keyword) {
  if (keyword.empty()) throw std::invalid_argument("empty keyword");
  ledger_.set_phase(Phase::search);
  ledger_.ecall(4 + keyword.size() + 16);

  auto it = client_.st.find(keyword);
  if (it == client_.st.end()) return {};
  auto [version, count] = it->second;
  if (count == 0) return {};

  // Consume every entry of the current version, tokens batched.
  std::vector<DocId> add_order;
  std::unordered_set<DocId> seen_add, deleted;
  for (uint64_t c = 1; c <= count; c += batch_.batch_size) {
    uint64_t n = std::min<uint64_t>(batch_.batch_size, count - c + 1);
    std::vector<Label> tokens;
    tokens.reserve(n);
    for (uint64_t i = c; i < c + n; i++)
      tokens.push_back(crypto::bunker_label(keys_.k1, keyword, version, i));
    auto pairs = store_.bunker_search(tokens);
    uint64_t response = 0;
    for (auto& [label, ct] : pairs) {
      response += 16 + ct.wire_size();
      auto [id, op] = open_record(keys_.k2, ct);
      if (op == UpdateOp::del) {
        deleted.insert(id);
      } else if (seen_add.insert(id).second) {
        add_order.push_back(id);
      }
    }
    ledger_.ocall(n * 16, response);
  }

  SearchResult result;
  for (DocId id : add_order)
    if (!deleted.count(id)) result.ids.push_back(id);

  // Re-insert the survivors under the next version, counters from 1.
  uint64_t next_version = version + 1;
  for (size_t start = 0; start < result.ids.size(); start += batch_.batch_size) {
    size_t n = std::min<size_t>(batch_.batch_size, result.ids.size() - start);
    uint64_t bytes = 0;
    for (size_t i = start; i < start + n; i++) {
      Label u = crypto::bunker_label(keys_.k1, keyword, next_version, i + 1);
      crypto::Ciphertext v = seal_record(keys_.k2, result.ids[i], UpdateOp::add);
      bytes += 16 + v.wire_size();
      store_.bunker_apply(u, std::move(v));
    }
    ledger_.ocall(bytes);
  }

  it->second = {next_version, result.ids.size()};
  return result;
}

}  // namespace dsse
