#include "dsse/store.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

namespace dsse {

namespace {

void write_record(std::ostream& out, std::span<const uint8_t> label,
                  const crypto::Ciphertext& ct) {
  Bytes buf;
  put_u32le(buf, uint32_t(label.size()));
  buf.insert(buf.end(), label.begin(), label.end());
  Bytes wire;
  wire.insert(wire.end(), ct.nonce.begin(), ct.nonce.end());
  wire.insert(wire.end(), ct.body.begin(), ct.body.end());
  wire.insert(wire.end(), ct.tag.begin(), ct.tag.end());
  put_u32le(buf, uint32_t(wire.size()));
  buf.insert(buf.end(), wire.begin(), wire.end());
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

bool read_record(std::istream& in, Bytes& label, crypto::Ciphertext& ct) {
  uint8_t len4[4];
  in.read(reinterpret_cast<char*>(len4), 4);
  if (in.gcount() == 0) return false;  // clean EOF
  if (!in) throw std::invalid_argument("store snapshot: truncated record");
  label.resize(get_u32le(len4));
  in.read(reinterpret_cast<char*>(label.data()), std::streamsize(label.size()));
  in.read(reinterpret_cast<char*>(len4), 4);
  Bytes wire(get_u32le(len4));
  in.read(reinterpret_cast<char*>(wire.data()), std::streamsize(wire.size()));
  if (!in || wire.size() < 28) throw std::invalid_argument("store snapshot: bad record");
  std::memcpy(ct.nonce.data(), wire.data(), 12);
  ct.body.assign(wire.begin() + 12, wire.end() - 16);
  std::memcpy(ct.tag.data(), wire.data() + wire.size() - 16, 16);
  return true;
}

}  // namespace

void ServerStore::record(StoreTag tag, AccessOp op, Origin origin,
                         std::span<const uint8_t> label, uint32_t vsize,
                         const Bytes* value) const {
  if (ledger_) ledger_->record_access(tag, op, origin, label, vsize, value);
}

void ServerStore::apply_update_batch(const UpdateBatch& batch) {
  // Validate the whole batch before mutating: label reuse is a protocol bug
  // and must not leave a half-applied batch behind.
  std::unordered_set<Label, LabelHash> fresh_index, fresh_state;
  for (const auto& e : batch) {
    if (m_i_.count(e.index_label) || m_c_.count(e.state_label))
      throw IntegrityError("update batch reuses a live label");
    if (!fresh_index.insert(e.index_label).second ||
        !fresh_state.insert(e.state_label).second)
      throw IntegrityError("duplicate label within update batch");
  }
  for (const auto& e : batch) {
    record(StoreTag::m_i, AccessOp::write, Origin::enclave, e.index_label,
           uint32_t(e.id_ct.wire_size()));
    m_i_.emplace(e.index_label, e.id_ct);
    record(StoreTag::m_c, AccessOp::write, Origin::enclave, e.state_label,
           uint32_t(e.c_ct.wire_size()));
    m_c_.emplace(e.state_label, e.c_ct);
    bytes_ += 32 + e.id_ct.wire_size() + e.c_ct.wire_size();
  }
}

void ServerStore::put_document(DocId id, crypto::Ciphertext doc, Origin origin) {
  auto label = be64(id);
  record(StoreTag::r, AccessOp::write, origin, label, uint32_t(doc.wire_size()));
  bytes_ += 8 + doc.wire_size();
  if (auto it = r_.find(id); it != r_.end()) bytes_ -= 8 + it->second.wire_size();
  r_[id] = std::move(doc);
}

std::optional<crypto::Ciphertext> ServerStore::get_document(DocId id, Origin origin) const {
  auto label = be64(id);
  auto it = r_.find(id);
  record(StoreTag::r, AccessOp::read, origin, label,
         it == r_.end() ? 0 : uint32_t(it->second.wire_size()));
  if (it == r_.end()) return std::nullopt;
  return it->second;
}

void ServerStore::delete_document(DocId id, Origin origin) {
  auto label = be64(id);
  record(StoreTag::r, AccessOp::del, origin, label, 0);
  if (auto it = r_.find(id); it != r_.end()) {
    bytes_ -= 8 + it->second.wire_size();
    r_.erase(it);
  }
}

std::optional<crypto::Ciphertext> ServerStore::get_state(const Label& label,
                                                         Origin origin) const {
  auto it = m_c_.find(label);
  record(StoreTag::m_c, AccessOp::read, origin, label,
         it == m_c_.end() ? 0 : uint32_t(it->second.wire_size()));
  if (it == m_c_.end()) return std::nullopt;
  return it->second;
}

void ServerStore::delete_state(const Label& label, Origin origin) {
  record(StoreTag::m_c, AccessOp::del, origin, label, 0);
  if (auto it = m_c_.find(label); it != m_c_.end()) {
    bytes_ -= 16 + it->second.wire_size();
    m_c_.erase(it);
  }
}

std::vector<std::pair<DocId, crypto::Ciphertext>> ServerStore::resolve_query(
    const QueryTokenList& tokens) const {
  std::vector<std::pair<DocId, crypto::Ciphertext>> results;
  for (const auto& tok : tokens) {
    auto it = m_i_.find(tok.index_label);
    record(StoreTag::m_i, AccessOp::read, Origin::server, tok.index_label,
           it == m_i_.end() ? 0 : uint32_t(it->second.wire_size()));
    if (it == m_i_.end()) continue;  // stale token from an earlier cleanup
    Bytes id_bytes;
    try {
      id_bytes = crypto::decrypt(tok.k_id, it->second);
    } catch (const AuthError&) {
      throw IntegrityError("index entry does not authenticate under its token key");
    }
    if (id_bytes.size() != 8)
      throw IntegrityError("index entry decodes to a malformed id");
    DocId id = get_u64le(id_bytes.data());
    auto doc = r_.find(id);
    auto label = be64(id);
    record(StoreTag::r, AccessOp::read, Origin::server, label,
           doc == r_.end() ? 0 : uint32_t(doc->second.wire_size()));
    if (doc == r_.end()) continue;  // physically deleted document
    results.emplace_back(id, doc->second);
  }
  return results;
}

void ServerStore::bunker_apply(const Label& label, crypto::Ciphertext value) {
  if (m_i_.count(label)) throw IntegrityError("index label reuse");
  record(StoreTag::m_i, AccessOp::write, Origin::enclave, label,
         uint32_t(value.wire_size()));
  bytes_ += 16 + value.wire_size();
  m_i_.emplace(label, std::move(value));
}

std::vector<std::pair<Label, crypto::Ciphertext>> ServerStore::bunker_search(
    const std::vector<Label>& tokens) {
  std::vector<std::pair<Label, crypto::Ciphertext>> out;
  for (const auto& tok : tokens) {
    auto it = m_i_.find(tok);
    record(StoreTag::m_i, AccessOp::read, Origin::enclave, tok,
           it == m_i_.end() ? 0 : uint32_t(it->second.wire_size()));
    if (it == m_i_.end()) continue;
    bytes_ -= 16 + it->second.wire_size();
    out.emplace_back(tok, std::move(it->second));
    record(StoreTag::m_i, AccessOp::del, Origin::enclave, tok, 0);
    m_i_.erase(it);
  }
  return out;
}

void ServerStore::snapshot_to(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto dump = [&](const char* name, const auto& map, auto key_bytes) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name);
    for (const auto& [k, v] : map) {
      auto kb = key_bytes(k);
      write_record(out, kb, v);
    }
  };
  dump("index.bin", m_i_, [](const Label& l) { return Bytes(l.begin(), l.end()); });
  dump("state.bin", m_c_, [](const Label& l) { return Bytes(l.begin(), l.end()); });
  dump("documents.bin", r_, [](DocId id) {
    Bytes b;
    put_u64le(b, id);
    return b;
  });
}

void ServerStore::restore_from(const std::string& dir) {
  namespace fs = std::filesystem;
  m_i_.clear();
  m_c_.clear();
  r_.clear();
  bytes_ = 0;
  auto load_labelled = [&](const char* name,
                           std::unordered_map<Label, crypto::Ciphertext, LabelHash>& map) {
    std::ifstream in(fs::path(dir) / name, std::ios::binary);
    if (!in) throw std::runtime_error(std::string("cannot read ") + name);
    Bytes label;
    crypto::Ciphertext ct;
    while (read_record(in, label, ct)) {
      if (label.size() != 16) throw std::invalid_argument("store snapshot: bad label size");
      Label l;
      std::memcpy(l.data(), label.data(), 16);
      if (map.emplace(l, ct).second) bytes_ += 16 + ct.wire_size();
    }
  };
  load_labelled("index.bin", m_i_);
  load_labelled("state.bin", m_c_);
  std::ifstream in(fs::path(dir) / "documents.bin", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read documents.bin");
  Bytes label;
  crypto::Ciphertext ct;
  while (read_record(in, label, ct)) {
    if (label.size() != 8) throw std::invalid_argument("store snapshot: bad id size");
    if (r_.emplace(get_u64le(label.data()), ct).second) bytes_ += 8 + ct.wire_size();
  }
}

}  // namespace dsse
