#include "dsse/boundary.hpp"

#include <memory>
#include <ostream>

namespace dsse {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::setup: return "setup";
    case Phase::update_add: return "update_add";
    case Phase::update_del: return "update_del";
    case Phase::search: return "search";
  }
  return "?";
}

const char* to_string(StoreTag t) {
  switch (t) {
    case StoreTag::m_i: return "M_I";
    case StoreTag::m_c: return "M_c";
    case StoreTag::r: return "R";
  }
  return "?";
}

const char* to_string(AccessOp op) {
  switch (op) {
    case AccessOp::read: return "read";
    case AccessOp::write: return "write";
    case AccessOp::del: return "delete";
  }
  return "?";
}

const char* to_string(Origin o) {
  switch (o) {
    case Origin::client: return "client";
    case Origin::enclave: return "enclave";
    case Origin::server: return "server";
  }
  return "?";
}

PhaseCounters PhaseCounters::operator-(const PhaseCounters& rhs) const {
  return {ecalls - rhs.ecalls, ocalls - rhs.ocalls, bytes_in - rhs.bytes_in,
          bytes_out - rhs.bytes_out};
}

PhaseCounters& PhaseCounters::operator+=(const PhaseCounters& rhs) {
  ecalls += rhs.ecalls;
  ocalls += rhs.ocalls;
  bytes_in += rhs.bytes_in;
  bytes_out += rhs.bytes_out;
  return *this;
}

PhaseCounters LedgerSnapshot::totals() const {
  PhaseCounters sum;
  for (const auto& p : phases) sum += p;
  return sum;
}

LedgerSnapshot LedgerSnapshot::operator-(const LedgerSnapshot& rhs) const {
  LedgerSnapshot out;
  for (int i = 0; i < kPhaseCount; i++) out.phases[i] = phases[i] - rhs.phases[i];
  return out;
}

void CallLedger::ecall(uint64_t payload_bytes) {
  auto& pc = phases_[size_t(phase_)];
  pc.ecalls++;
  pc.bytes_in += payload_bytes;
}

void CallLedger::ocall(uint64_t payload_out, uint64_t response_in) {
  auto& pc = phases_[size_t(phase_)];
  pc.ocalls++;
  pc.bytes_out += payload_out;
  pc.bytes_in += response_in;
}

void CallLedger::record_access(StoreTag tag, AccessOp op, Origin origin,
                               std::span<const uint8_t> label, uint32_t value_size,
                               const Bytes* value) {
  clock_++;
  if (!trace_enabled_) return;
  TraceEvent ev;
  ev.t = clock_;
  ev.op = op;
  ev.tag = tag;
  ev.origin = origin;
  ev.label_len = uint8_t(std::min<size_t>(label.size(), ev.label.size()));
  std::memcpy(ev.label.data(), label.data(), ev.label_len);
  ev.value_size = value_size;
  if (retain_values_ && value) ev.value = std::make_shared<Bytes>(*value);
  trace_.push_back(std::move(ev));
}

PhaseCounters CallLedger::totals() const {
  PhaseCounters sum;
  for (const auto& p : phases_) sum += p;
  return sum;
}

LedgerSnapshot CallLedger::snapshot() const {
  LedgerSnapshot s;
  s.phases = phases_;
  return s;
}

void CallLedger::write_csv(std::ostream& out) const {
  out << "phase,ecalls,ocalls,bytes_in,bytes_out\n";
  for (int i = 0; i < kPhaseCount; i++) {
    const auto& pc = phases_[i];
    out << to_string(Phase(i)) << ',' << pc.ecalls << ',' << pc.ocalls << ','
        << pc.bytes_in << ',' << pc.bytes_out << '\n';
  }
}

void CallLedger::write_trace_csv(std::ostream& out) const {
  out << "t,op,structure,label,value_size\n";
  for (const auto& ev : trace_)
    out << ev.t << ',' << to_string(ev.op) << ',' << to_string(ev.tag) << ','
        << hex(ev.label_span()) << ',' << ev.value_size << '\n';
}

uint64_t batched_ocalls(CallLedger& ledger, uint64_t item_count, uint64_t batch_size,
                        uint64_t bytes_per_item) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  uint64_t calls = 0;
  for (uint64_t sent = 0; sent < item_count; sent += batch_size, calls++) {
    uint64_t n = std::min(batch_size, item_count - sent);
    ledger.ocall(n * bytes_per_item);
  }
  return calls;
}

std::vector<TraceEvent> trace_filter(const std::vector<TraceEvent>& trace, StoreTag tag,
                                     const std::function<bool(const TraceEvent&)>& pred) {
  std::vector<TraceEvent> out;
  for (const auto& ev : trace)
    if (ev.tag == tag && (!pred || pred(ev))) out.push_back(ev);
  return out;
}

}  // namespace dsse
