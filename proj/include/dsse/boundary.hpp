#pragma once

#include <functional>
#include <iosfwd>
#include <memory>

#include "dsse/types.hpp"

namespace dsse {

enum class Phase : uint8_t { setup = 0, update_add = 1, update_del = 2, search = 3 };
constexpr int kPhaseCount = 4;

enum class StoreTag : uint8_t { m_i, m_c, r };
enum class AccessOp : uint8_t { read, write, del };
// Who the access serves: client-path transfers, enclave-driven fetches and
// mutations, or server-local processing while resolving a query.
enum class Origin : uint8_t { client, enclave, server };

const char* to_string(Phase p);
const char* to_string(StoreTag t);
const char* to_string(AccessOp op);
const char* to_string(Origin o);

// One observable access on a server-resident structure: label touched,
// structure, value size, logical time, operation, requester.
struct TraceEvent {
  uint64_t t = 0;
  AccessOp op = AccessOp::read;
  StoreTag tag = StoreTag::m_i;
  Origin origin = Origin::server;
  std::array<uint8_t, 16> label{};
  uint8_t label_len = 0;
  uint32_t value_size = 0;
  std::shared_ptr<Bytes> value;  // populated only when value retention is on

  std::span<const uint8_t> label_span() const { return {label.data(), label_len}; }
};

struct PhaseCounters {
  uint64_t ecalls = 0;
  uint64_t ocalls = 0;
  uint64_t bytes_in = 0;   // bytes crossing into the enclave
  uint64_t bytes_out = 0;  // bytes crossing out of the enclave

  PhaseCounters operator-(const PhaseCounters& rhs) const;
  PhaseCounters& operator+=(const PhaseCounters& rhs);
  bool operator==(const PhaseCounters&) const = default;
};

// Copyable counter snapshot; subtracting two snapshots gives the activity
// between them, per phase.
struct LedgerSnapshot {
  std::array<PhaseCounters, kPhaseCount> phases{};

  const PhaseCounters& operator[](Phase p) const { return phases[size_t(p)]; }
  PhaseCounters totals() const;
  LedgerSnapshot operator-(const LedgerSnapshot& rhs) const;
  bool operator==(const LedgerSnapshot&) const = default;
};

// Accounting for every crossing of the simulated enclave boundary, plus the
// access trace an adversary observing server memory would collect.
class CallLedger {
 public:
  void set_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }

  void ecall(uint64_t payload_bytes);
  // An ocall carries payload_out bytes out of the enclave and optionally a
  // response of response_in bytes back in.
  void ocall(uint64_t payload_out, uint64_t response_in = 0);

  void record_access(StoreTag tag, AccessOp op, Origin origin,
                     std::span<const uint8_t> label, uint32_t value_size,
                     const Bytes* value = nullptr);

  const PhaseCounters& phase_counters(Phase p) const { return phases_[size_t(p)]; }
  PhaseCounters totals() const;
  LedgerSnapshot snapshot() const;

  const std::vector<TraceEvent>& trace() const { return trace_; }
  uint64_t now() const { return clock_; }

  void set_trace_enabled(bool on) { trace_enabled_ = on; }
  void set_retain_values(bool on) { retain_values_ = on; }

  // CSV: phase,ecalls,ocalls,bytes_in,bytes_out — one row per phase.
  void write_csv(std::ostream& out) const;
  // CSV: t,op,structure,label,value_size with the label in hex.
  void write_trace_csv(std::ostream& out) const;

 private:
  Phase phase_ = Phase::setup;
  std::array<PhaseCounters, kPhaseCount> phases_{};
  std::vector<TraceEvent> trace_;
  uint64_t clock_ = 0;
  bool trace_enabled_ = true;
  bool retain_values_ = false;
};

// Sends item_count items out in ceil(item_count / batch_size) ocalls of
// bytes_per_item * batch bytes each; zero items cost zero ocalls. Returns the
// number of ocalls issued.
uint64_t batched_ocalls(CallLedger& ledger, uint64_t item_count, uint64_t batch_size,
                        uint64_t bytes_per_item = 0);

// Events on one structure satisfying pred, in trace order.
std::vector<TraceEvent> trace_filter(const std::vector<TraceEvent>& trace, StoreTag tag,
                                     const std::function<bool(const TraceEvent&)>& pred);

}  // namespace dsse
