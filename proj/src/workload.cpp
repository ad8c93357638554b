#include "dsse/workload.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dsse/bunker.hpp"
#include "dsse/oracle.hpp"
#include "dsse/se1.hpp"
#include "dsse/se2.hpp"

namespace dsse {

namespace {

// All sampling goes through this so results do not depend on the standard
// library's distribution implementations.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  uint64_t below(uint64_t n) { return n ? eng() % n : 0; }
};

uint64_t now_us() {
  return uint64_t(std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now().time_since_epoch())
                      .count());
}

std::string keyword_name(uint32_t rank, uint32_t num_keywords) {
  int width = 1;
  for (uint32_t x = num_keywords; x >= 10; x /= 10) width++;
  std::ostringstream s;
  s << "kw";
  s.width(width);
  s.fill('0');
  s << rank;
  return s.str();
}

}  // namespace

size_t WorkloadScript::doc_count() const {
  size_t n = 0;
  for (const auto& op : ops) n += std::holds_alternative<AddOp>(op);
  return n;
}

size_t WorkloadScript::pair_count() const {
  size_t n = 0;
  for (const auto& op : ops)
    if (auto* add = std::get_if<AddOp>(&op)) n += add->keywords.size();
  return n;
}

size_t WorkloadScript::delete_count() const {
  size_t n = 0;
  for (const auto& op : ops) n += std::holds_alternative<DelOp>(op);
  return n;
}

size_t WorkloadScript::query_count() const {
  size_t n = 0;
  for (const auto& op : ops) n += std::holds_alternative<QueryOp>(op);
  return n;
}

std::vector<std::string> WorkloadScript::top_keywords(size_t k) const {
  std::map<std::string, uint64_t> freq;
  for (const auto& op : ops)
    if (auto* add = std::get_if<AddOp>(&op))
      for (const auto& w : add->keywords) freq[w]++;
  std::vector<std::pair<std::string, uint64_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (size_t i = 0; i < items.size() && i < k; i++) out.push_back(items[i].first);
  return out;
}

WorkloadScript gen_zipf(uint32_t num_keywords, uint64_t num_docs, uint64_t total_pairs,
                        uint64_t seed) {
  if (num_keywords < 1 || num_docs < 1)
    throw std::invalid_argument("need at least one keyword and one document");
  if (total_pairs < num_docs)
    throw std::invalid_argument("total_pairs must cover one keyword per document");
  if (total_pairs > num_keywords * num_docs)
    throw std::invalid_argument("total_pairs exceeds the distinct pair space");

  // Per-rank quotas: proportional to 1/rank, capped at num_docs, water-filled
  // so the capped ranks' overflow moves down the tail.
  std::vector<uint64_t> quota(num_keywords);
  {
    double lo = 0, hi = double(num_docs) * num_keywords;
    for (int iter = 0; iter < 200; iter++) {
      double alpha = (lo + hi) / 2;
      double sum = 0;
      for (uint32_t r = 1; r <= num_keywords; r++)
        sum += std::min(double(num_docs), alpha / r);
      (sum < double(total_pairs) ? lo : hi) = alpha;
    }
    uint64_t sum = 0;
    for (uint32_t r = 1; r <= num_keywords; r++) {
      quota[r - 1] = std::min<uint64_t>(num_docs, uint64_t(hi / r));
      sum += quota[r - 1];
    }
    // Floor rounding leaves a small deficit; spread it over uncapped ranks.
    for (uint32_t r = 0; sum < total_pairs; r = (r + 1) % num_keywords) {
      if (quota[r] < num_docs) {
        quota[r]++;
        sum++;
      }
    }
    while (sum > total_pairs) {
      for (uint32_t r = num_keywords; r-- > 0 && sum > total_pairs;) {
        if (quota[r] > 0) {
          quota[r]--;
          sum--;
        }
      }
    }
  }

  Rng rng(seed);
  std::vector<std::vector<uint32_t>> doc_kws(num_docs);  // ranks per doc

  // Capped ranks appear in every document.
  bool covered = false;
  std::vector<uint32_t> slots;  // one entry per remaining pair, keyword rank
  for (uint32_t r = 0; r < num_keywords; r++) {
    if (quota[r] == num_docs) {
      for (auto& kws : doc_kws) kws.push_back(r);
      covered = true;
    } else {
      for (uint64_t i = 0; i < quota[r]; i++) slots.push_back(r);
    }
  }
  // Fisher-Yates with our own draws.
  for (size_t i = slots.size(); i > 1; i--)
    std::swap(slots[i - 1], slots[rng.below(i)]);

  size_t next_slot = 0;
  if (!covered) {
    // No rank fills every doc, so deal each doc its first keyword directly.
    for (uint64_t doc = 0; doc < num_docs && next_slot < slots.size(); doc++)
      doc_kws[doc].push_back(slots[next_slot++]);
  }
  auto has_rank = [&](uint64_t doc, uint32_t r) {
    const auto& kws = doc_kws[doc];
    return std::find(kws.begin(), kws.end(), r) != kws.end();
  };
  for (; next_slot < slots.size(); next_slot++) {
    uint32_t r = slots[next_slot];
    uint64_t doc = rng.below(num_docs);
    int tries = 0;
    while (has_rank(doc, r) && ++tries < 64) doc = rng.below(num_docs);
    if (has_rank(doc, r)) {
      // Dense rank: scan for a document that still lacks it.
      uint64_t start = doc;
      do doc = (doc + 1) % num_docs;
      while (has_rank(doc, r) && doc != start);
    }
    doc_kws[doc].push_back(r);
  }

  WorkloadScript script;
  script.seed = seed;
  script.ops.reserve(num_docs);
  for (uint64_t doc = 0; doc < num_docs; doc++) {
    auto& ranks = doc_kws[doc];
    std::sort(ranks.begin(), ranks.end());
    AddOp add;
    add.id = doc + 1;
    add.keywords.reserve(ranks.size());
    for (uint32_t r : ranks) add.keywords.push_back(keyword_name(r + 1, num_keywords));
    script.ops.push_back(std::move(add));
  }
  return script;
}

WorkloadScript ingest_corpus(const std::string& path, const TokenizerConfig& cfg) {
  namespace fs = std::filesystem;
  auto tokenize = [&](const std::string& text) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::string cur;
    auto flush = [&] {
      if (cur.size() >= cfg.min_token_len) {
        if (cur.size() > cfg.max_token_len) cur.resize(cfg.max_token_len);
        if (seen.insert(cur).second) out.push_back(cur);
      }
      cur.clear();
    };
    for (unsigned char ch : text) {
      if (std::isalnum(ch))
        cur.push_back(char(std::tolower(ch)));
      else
        flush();
    }
    flush();
    std::sort(out.begin(), out.end());
    return out;
  };

  WorkloadScript script;
  DocId next_id = 1;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      script.ops.push_back(AddOp{next_id++, tokenize(buf.str())});
    }
  } else {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open corpus: " + path);
    std::string line;
    while (std::getline(in, line))
      script.ops.push_back(AddOp{next_id++, tokenize(line)});
  }
  return script;
}

void save_script(const WorkloadScript& script, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write script: " + path);
  for (const auto& op : script.ops) {
    if (auto* add = std::get_if<AddOp>(&op)) {
      out << "D " << add->id;
      for (const auto& w : add->keywords) out << ' ' << w;
      out << '\n';
    } else if (auto* del = std::get_if<DelOp>(&op)) {
      out << "X " << del->id << '\n';
    } else {
      out << "Q " << std::get<QueryOp>(op).keyword << '\n';
    }
  }
}

WorkloadScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open script: " + path);
  WorkloadScript script;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    auto bad = [&](const char* why) {
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": " + why);
    };
    if (tag == "D") {
      AddOp add;
      if (!(row >> add.id)) bad("missing document id");
      std::string w;
      while (row >> w) add.keywords.push_back(w);
      std::sort(add.keywords.begin(), add.keywords.end());
      add.keywords.erase(std::unique(add.keywords.begin(), add.keywords.end()),
                         add.keywords.end());
      script.ops.push_back(std::move(add));
    } else if (tag == "X") {
      DelOp del;
      if (!(row >> del.id)) bad("missing document id");
      script.ops.push_back(del);
    } else if (tag == "Q") {
      QueryOp q;
      if (!(row >> q.keyword)) bad("missing keyword");
      script.ops.push_back(std::move(q));
    } else {
      bad("unknown op tag");
    }
  }
  return script;
}

Bytes synthesize_body(uint64_t seed, DocId id, const std::vector<std::string>& keywords,
                      size_t mean_bytes) {
  Bytes body;
  for (size_t i = 0; i < keywords.size(); i++) {
    if (i) body.push_back(' ');
    body.insert(body.end(), keywords[i].begin(), keywords[i].end());
  }
  Rng rng(seed ^ (id * 0x9e3779b97f4a7c15ULL));
  size_t target = mean_bytes / 2 + rng.below(std::max<size_t>(1, mean_bytes));
  while (body.size() < target)
    body.push_back(uint8_t('a' + rng.below(26)));
  return body;
}

namespace {

// Uniform per-scheme driver facade.
struct SchemeDriver {
  std::unique_ptr<Se1Session> se1;
  std::unique_ptr<Se2Session> se2;
  std::unique_ptr<BunkerSession> bb;

  void add(DocId id, const std::vector<std::string>& kws, const Bytes& body) {
    if (se1) se1->add(id, kws, body);
    else if (se2) se2->add(id, kws, body);
    else bb->add_document(id, kws);
  }
  void del(DocId id, const std::vector<std::string>& kws) {
    if (se1) se1->del(id);
    else if (se2) se2->del(id);
    else bb->delete_document(id, kws);
  }
  SearchResult search(const std::string& w) {
    if (se1) return se1->search(w);
    if (se2) return se2->search(w);
    return bb->search(w);
  }
  CallLedger& ledger() {
    if (se1) return se1->ledger();
    if (se2) return se2->ledger();
    return bb->ledger();
  }
  ServerStore& store() {
    if (se1) return se1->store();
    if (se2) return se2->store();
    return bb->store();
  }
  uint64_t enclave_bytes() const {
    if (se1) return se1->enclave_snapshot().size();
    if (se2) return se2->enclave_snapshot().size();
    return 0;  // no persistent enclave state
  }
};

}  // namespace

RunResult run_experiment(const WorkloadScript& script, const RunConfig& config) {
  auto keys = crypto::KeyBundle::from_seed(config.seed);
  BatchConfig batch{config.batch_size};

  SchemeDriver driver;
  switch (config.scheme) {
    case SchemeTag::sgx_se1:
      driver.se1 = std::make_unique<Se1Session>(keys, batch);
      break;
    case SchemeTag::sgx_se2: {
      auto params = estimate_params(std::max<uint64_t>(1, script.pair_count()),
                                    config.bloom_fp);
      driver.se2 = std::make_unique<Se2Session>(keys, params, batch);
      break;
    }
    case SchemeTag::bunker_b:
      driver.bb = std::make_unique<BunkerSession>(keys, batch);
      break;
  }
  driver.ledger().set_trace_enabled(config.trace);

  // Build the effective op sequence: explicit ops, then sampled deletions and
  // default queries when the script does not carry its own.
  std::vector<ScriptOp> ops = script.ops;
  std::unordered_map<DocId, const std::vector<std::string>*> doc_kws;
  std::vector<DocId> added_order;
  for (const auto& op : script.ops)
    if (auto* add = std::get_if<AddOp>(&op)) {
      doc_kws[add->id] = &add->keywords;
      added_order.push_back(add->id);
    }
  if (script.delete_count() == 0 && config.delete_frac > 0) {
    size_t want = size_t(llround(config.delete_frac * double(added_order.size())));
    std::vector<DocId> pool = added_order;
    Rng rng(config.seed ^ 0x64656c6574655fULL);
    for (size_t i = 0; i < want && i < pool.size(); i++) {
      size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      ops.push_back(DelOp{pool[i]});
    }
  }
  if (script.query_count() == 0 && config.top_k > 0) {
    for (const auto& w : script.top_keywords(config.top_k)) ops.push_back(QueryOp{w});
  }

  OracleIndex oracle;
  RunResult result;
  std::array<uint64_t, kPhaseCount> wall{};
  std::array<uint64_t, kPhaseCount> enclave_at{}, server_at{};
  size_t query_index = 0;

  // The per-phase rows want the enclave/server footprint after the phase's
  // last op, so sample when the op stream leaves a phase (and once at the
  // end) — serializing the enclave after every one of a million updates would
  // dwarf the run itself.
  std::optional<Phase> open_phase;
  auto enter_phase = [&](std::optional<Phase> next) {
    if (open_phase && open_phase != next) {
      enclave_at[size_t(*open_phase)] = driver.enclave_bytes();
      server_at[size_t(*open_phase)] = driver.store().byte_size();
    }
    open_phase = next;
  };

  for (const auto& op : ops) {
    const auto& trace = driver.ledger().trace();
    if (auto* add = std::get_if<AddOp>(&op)) {
      enter_phase(Phase::update_add);
      Bytes body = synthesize_body(config.seed, add->id, add->keywords,
                                   config.mean_body_bytes);
      uint64_t t0 = now_us();
      driver.add(add->id, add->keywords, body);
      wall[size_t(Phase::update_add)] += now_us() - t0;
      oracle.oracle_add(add->id, add->keywords);
    } else if (auto* del = std::get_if<DelOp>(&op)) {
      enter_phase(Phase::update_del);
      uint64_t t0 = now_us();
      driver.del(del->id, *doc_kws.at(del->id));
      wall[size_t(Phase::update_del)] += now_us() - t0;
      oracle.oracle_delete(del->id);
      result.server_bytes_after_delete.push_back(driver.store().byte_size());
    } else {
      enter_phase(Phase::search);
      const auto& q = std::get<QueryOp>(op);
      auto before = driver.ledger().snapshot();
      size_t trace_before = trace.size();
      uint64_t t0 = now_us();
      SearchResult got = driver.search(q.keyword);
      uint64_t dt = now_us() - t0;
      wall[size_t(Phase::search)] += dt;

      auto expect = oracle.oracle_search(q.keyword);
      std::vector<DocId> got_sorted = got.ids;
      std::sort(got_sorted.begin(), got_sorted.end());
      if (got_sorted != expect) {
        std::ostringstream msg;
        msg << "oracle mismatch on query '" << q.keyword << "' (#" << query_index
            << "): scheme returned " << got.ids.size() << " ids, oracle has "
            << expect.size();
        throw std::runtime_error(msg.str());
      }

      auto delta = (driver.ledger().snapshot() - before)[Phase::search];
      QueryReport qr;
      qr.index = query_index++;
      qr.keyword = q.keyword;
      qr.ecalls = delta.ecalls;
      qr.ocalls = delta.ocalls;
      qr.bytes = delta.bytes_in + delta.bytes_out;
      qr.wall_us = dt;
      qr.results = got.ids.size();
      for (size_t i = trace_before; i < trace.size(); i++) {
        const auto& ev = trace[i];
        if (ev.op != AccessOp::read) continue;
        if (ev.tag == StoreTag::r && ev.origin == Origin::enclave) qr.r_fetches++;
        if (ev.tag == StoreTag::m_c && ev.origin == Origin::enclave) qr.state_items++;
        if (ev.tag == StoreTag::m_i) qr.tokens++;
      }
      result.queries.push_back(std::move(qr));
    }
  }
  enter_phase(std::nullopt);

  result.ledger = driver.ledger().snapshot();
  if (!config.ledger_csv_path.empty()) {
    std::ofstream out(config.ledger_csv_path);
    if (!out) throw std::runtime_error("cannot write " + config.ledger_csv_path);
    driver.ledger().write_csv(out);
  }
  if (!config.trace_csv_path.empty()) {
    std::ofstream out(config.trace_csv_path);
    if (!out) throw std::runtime_error("cannot write " + config.trace_csv_path);
    driver.ledger().write_trace_csv(out);
  }
  enclave_at[size_t(Phase::setup)] = driver.enclave_bytes();
  server_at[size_t(Phase::setup)] = 0;
  for (int i = 0; i < kPhaseCount; i++) {
    const auto& pc = result.ledger.phases[i];
    ReportRow row;
    row.scheme = to_string(config.scheme);
    row.phase = to_string(Phase(i));
    row.ecalls = pc.ecalls;
    row.ocalls = pc.ocalls;
    row.bytes = pc.bytes_in + pc.bytes_out;
    row.wall_us = wall[i];
    row.enclave_bytes = enclave_at[i];
    row.server_bytes = server_at[i];
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_report_csv(std::ostream& out, const RunResult& result) {
  out << "scheme,phase,ecalls,ocalls,bytes,wall_us,enclave_bytes,server_bytes,"
         "results,r_fetches,state_items,tokens\n";
  for (const auto& r : result.rows)
    out << r.scheme << ',' << r.phase << ',' << r.ecalls << ',' << r.ocalls << ','
        << r.bytes << ',' << r.wall_us << ',' << r.enclave_bytes << ','
        << r.server_bytes << ",0,0,0,0\n";
  for (const auto& q : result.queries)
    out << result.rows[0].scheme << ",query:" << q.index << ':' << q.keyword << ','
        << q.ecalls << ',' << q.ocalls << ',' << q.bytes << ',' << q.wall_us << ",0,0,"
        << q.results << ',' << q.r_fetches << ',' << q.state_items << ',' << q.tokens
        << '\n';
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    if (cols.size() < 8) continue;
    ReportRow r;
    r.scheme = cols[0];
    r.phase = cols[1];
    r.ecalls = std::stoull(cols[2]);
    r.ocalls = std::stoull(cols[3]);
    r.bytes = std::stoull(cols[4]);
    r.wall_us = std::stoull(cols[5]);
    r.enclave_bytes = std::stoull(cols[6]);
    r.server_bytes = std::stoull(cols[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_comparison(std::ostream& out, const std::vector<std::vector<ReportRow>>& reports,
                      bool csv) {
  // Merge phase rows keyed by phase, one column group per scheme.
  std::vector<std::string> schemes;
  std::map<std::string, std::map<std::string, const ReportRow*>> by_phase;
  static const char* phase_order[] = {"setup", "update_add", "update_del", "search"};
  for (const auto& rows : reports)
    for (const auto& r : rows) {
      if (r.phase.rfind("query:", 0) == 0) continue;
      if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end())
        schemes.push_back(r.scheme);
      by_phase[r.phase][r.scheme] = &r;
    }
  if (csv) {
    out << "phase";
    for (const auto& s : schemes)
      out << ',' << s << "_ecalls," << s << "_ocalls," << s << "_bytes," << s
          << "_wall_us";
    out << '\n';
    for (const char* phase : phase_order) {
      auto it = by_phase.find(phase);
      if (it == by_phase.end()) continue;
      out << phase;
      for (const auto& s : schemes) {
        auto r = it->second.count(s) ? it->second[s] : nullptr;
        if (r)
          out << ',' << r->ecalls << ',' << r->ocalls << ',' << r->bytes << ','
              << r->wall_us;
        else
          out << ",,,,";
      }
      out << '\n';
    }
    return;
  }
  for (const char* phase : phase_order) {
    auto it = by_phase.find(phase);
    if (it == by_phase.end()) continue;
    out << phase << "\n";
    for (const auto& s : schemes) {
      if (!it->second.count(s)) continue;
      const auto* r = it->second[s];
      out << "  " << s << ": ecalls=" << r->ecalls << " ocalls=" << r->ocalls
          << " bytes=" << r->bytes << " wall_us=" << r->wall_us
          << " enclave_bytes=" << r->enclave_bytes
          << " server_bytes=" << r->server_bytes << "\n";
    }
  }
}

}  // namespace dsse
