#pragma once

#include <variant>

#include "dsse/boundary.hpp"
#include "dsse/types.hpp"

namespace dsse {

struct AddOp {
  DocId id;
  std::vector<std::string> keywords;  // sorted, unique
};
struct DelOp {
  DocId id;
};
struct QueryOp {
  std::string keyword;
};
using ScriptOp = std::variant<AddOp, DelOp, QueryOp>;

// An ordered operation sequence. The on-disk form is line-oriented:
//   D <id> <kw1> <kw2> ...     add document
//   X <id>                     delete document
//   Q <kw>                     search
// Document bodies are never stored; they are synthesized deterministically
// from (seed, id, keywords) at run time.
struct WorkloadScript {
  std::vector<ScriptOp> ops;
  uint64_t seed = 0;

  size_t doc_count() const;
  size_t pair_count() const;
  size_t delete_count() const;
  size_t query_count() const;
  // Keywords by descending add-frequency (ties broken lexicographically).
  std::vector<std::string> top_keywords(size_t k) const;
};

// Synthetic corpus with Zipf keyword frequencies: rank r carries weight 1/r,
// per-keyword targets are normalized to total_pairs (capped at num_docs since
// a keyword appears at most once per document), and every document receives
// at least one keyword. Same seed, same script.
WorkloadScript gen_zipf(uint32_t num_keywords, uint64_t num_docs, uint64_t total_pairs,
                        uint64_t seed);

struct TokenizerConfig {
  size_t min_token_len = 1;
  size_t max_token_len = 255;
};

// Reads a directory of text files (one document each, filename order) or a
// single file (one document per line). Tokens are lowercased maximal
// alphanumeric runs, deduplicated per document.
WorkloadScript ingest_corpus(const std::string& path, const TokenizerConfig& cfg = {});

void save_script(const WorkloadScript& script, const std::string& path);
WorkloadScript load_script(const std::string& path);

struct RunConfig {
  SchemeTag scheme = SchemeTag::sgx_se2;
  uint64_t batch_size = 100000;
  double delete_frac = 0.25;   // used only when the script has no X lines
  uint32_t top_k = 25;         // used only when the script has no Q lines
  double bloom_fp = 1e-4;
  uint64_t seed = 0;
  size_t mean_body_bytes = 3072;
  bool trace = true;
  // When set, the boundary ledger / access trace are exported here after the run.
  std::string ledger_csv_path;
  std::string trace_csv_path;
};

struct ReportRow {
  std::string scheme;
  std::string phase;
  uint64_t ecalls = 0;
  uint64_t ocalls = 0;
  uint64_t bytes = 0;  // bytes_in + bytes_out across the boundary
  uint64_t wall_us = 0;
  uint64_t enclave_bytes = 0;
  uint64_t server_bytes = 0;
};

// Per-search detail: raw item counts alongside the batched ocall totals.
struct QueryReport {
  size_t index = 0;
  std::string keyword;
  uint64_t ecalls = 0;
  uint64_t ocalls = 0;
  uint64_t bytes = 0;
  uint64_t wall_us = 0;
  uint64_t results = 0;
  uint64_t r_fetches = 0;    // documents pulled into the enclave
  uint64_t state_items = 0;  // state-map lookups issued by the enclave
  uint64_t tokens = 0;       // index lookups during resolution
};

struct RunResult {
  std::vector<ReportRow> rows;  // one per phase, in phase order
  std::vector<QueryReport> queries;
  LedgerSnapshot ledger;
  // Server-store byte size sampled after every delete op (memory shape).
  std::vector<uint64_t> server_bytes_after_delete;
};

// Replays the script against one scheme with a plaintext-oracle mirror; adds
// first as given, then explicit deletions/queries if the script has them,
// otherwise a sampled uniform deletion fraction and top-k queries. Any result
// set differing from the oracle raises a runtime error.
RunResult run_experiment(const WorkloadScript& script, const RunConfig& config);

void write_report_csv(std::ostream& out, const RunResult& result);
std::vector<ReportRow> read_report_csv(std::istream& in);
void write_comparison(std::ostream& out, const std::vector<std::vector<ReportRow>>& reports,
                      bool csv);

// Deterministic body synthesis: keywords joined by spaces, padded with seeded
// bytes to a length drawn around mean_bytes.
Bytes synthesize_body(uint64_t seed, DocId id, const std::vector<std::string>& keywords,
                      size_t mean_bytes);

}  // namespace dsse
