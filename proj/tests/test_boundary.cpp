#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "dsse/boundary.hpp"

using namespace dsse;

namespace {
std::array<uint8_t, 16> label_of(uint8_t fill) {
  std::array<uint8_t, 16> l;
  l.fill(fill);
  return l;
}
}  // namespace

TEST_CASE("calls and bytes accumulate in the active phase only") {
  CallLedger ledger;
  ledger.set_phase(Phase::update_add);
  ledger.ecall(100);
  ledger.ecall(50);
  ledger.ocall(30, 7);

  ledger.set_phase(Phase::search);
  ledger.ecall(5);
  ledger.ocall(16, 36);
  ledger.ocall(16);

  auto add = ledger.phase_counters(Phase::update_add);
  CHECK(add.ecalls == 2);
  CHECK(add.ocalls == 1);
  CHECK(add.bytes_in == 157);  // 100 + 50 ecall payloads + 7 ocall response
  CHECK(add.bytes_out == 30);

  auto search = ledger.phase_counters(Phase::search);
  CHECK(search.ecalls == 1);
  CHECK(search.ocalls == 2);
  CHECK(search.bytes_in == 41);
  CHECK(search.bytes_out == 32);

  CHECK(ledger.phase_counters(Phase::setup) == PhaseCounters{});
  CHECK(ledger.phase_counters(Phase::update_del) == PhaseCounters{});

  auto total = ledger.totals();
  CHECK(total.ecalls == 3);
  CHECK(total.ocalls == 3);
  CHECK(total.bytes_in == 198);
  CHECK(total.bytes_out == 62);
}

TEST_CASE("snapshot deltas isolate the activity between two points") {
  CallLedger ledger;
  ledger.set_phase(Phase::search);
  ledger.ecall(10);
  auto before = ledger.snapshot();
  ledger.ecall(20);
  ledger.ocall(8, 64);
  auto delta = ledger.snapshot() - before;
  CHECK(delta[Phase::search].ecalls == 1);
  CHECK(delta[Phase::search].ocalls == 1);
  CHECK(delta[Phase::search].bytes_in == 84);
  CHECK(delta[Phase::search].bytes_out == 8);
  CHECK(delta[Phase::setup] == PhaseCounters{});
  CHECK(delta.totals().ecalls == 1);
}

TEST_CASE("batched transfers cost one call per full or partial batch") {
  CallLedger ledger;
  ledger.set_phase(Phase::search);
  CHECK(batched_ocalls(ledger, 0, 100) == 0);
  CHECK(batched_ocalls(ledger, 1, 100) == 1);
  CHECK(batched_ocalls(ledger, 100, 100) == 1);
  CHECK(batched_ocalls(ledger, 101, 100) == 2);
  CHECK(batched_ocalls(ledger, 1050000, 100000) == 11);
  CHECK(ledger.phase_counters(Phase::search).ocalls == 15);
  CHECK_THROWS_AS(batched_ocalls(ledger, 5, 0), std::invalid_argument);

  // Byte accounting covers exactly item_count items, not padded batches.
  CallLedger bytes_ledger;
  bytes_ledger.set_phase(Phase::search);
  batched_ocalls(bytes_ledger, 101, 100, 16);
  CHECK(bytes_ledger.phase_counters(Phase::search).bytes_out == 101 * 16);
}

TEST_CASE("the access trace records order, time, structure and requester") {
  CallLedger ledger;
  ledger.set_phase(Phase::update_add);
  auto la = label_of(0xaa);
  auto lb = label_of(0xbb);
  ledger.record_access(StoreTag::m_i, AccessOp::write, Origin::enclave, la, 36);
  ledger.record_access(StoreTag::r, AccessOp::write, Origin::client, lb, 512);
  ledger.record_access(StoreTag::m_i, AccessOp::read, Origin::server, la, 36);
  ledger.record_access(StoreTag::m_i, AccessOp::del, Origin::enclave, la, 0);

  const auto& tr = ledger.trace();
  REQUIRE(tr.size() == 4);
  CHECK(tr[0].t < tr[1].t);
  CHECK(tr[1].t < tr[2].t);
  CHECK(tr[2].t < tr[3].t);
  CHECK(tr[0].op == AccessOp::write);
  CHECK(tr[0].tag == StoreTag::m_i);
  CHECK(tr[0].origin == Origin::enclave);
  CHECK(tr[0].label_len == 16);
  CHECK(std::equal(tr[0].label_span().begin(), tr[0].label_span().end(), la.begin()));
  CHECK(tr[1].tag == StoreTag::r);
  CHECK(tr[1].origin == Origin::client);
  CHECK(tr[1].value_size == 512);
  CHECK(tr[3].op == AccessOp::del);

  auto index_reads = trace_filter(tr, StoreTag::m_i,
                                  [](const TraceEvent& e) { return e.op == AccessOp::read; });
  REQUIRE(index_reads.size() == 1);
  CHECK(index_reads[0].origin == Origin::server);
}

TEST_CASE("disabling the trace stops recording but time still advances") {
  CallLedger ledger;
  auto l = label_of(1);
  ledger.record_access(StoreTag::m_i, AccessOp::write, Origin::enclave, l, 1);
  uint64_t t0 = ledger.now();
  ledger.set_trace_enabled(false);
  ledger.record_access(StoreTag::m_i, AccessOp::write, Origin::enclave, l, 1);
  ledger.record_access(StoreTag::m_c, AccessOp::write, Origin::enclave, l, 1);
  CHECK(ledger.trace().size() == 1);
  CHECK(ledger.now() > t0);  // ordering survives for later re-enablement
  ledger.set_trace_enabled(true);
  ledger.record_access(StoreTag::r, AccessOp::read, Origin::server, l, 9);
  REQUIRE(ledger.trace().size() == 2);
  CHECK(ledger.trace()[1].t > ledger.trace()[0].t + 1);
}

TEST_CASE("values are retained only when asked") {
  CallLedger ledger;
  auto l = label_of(2);
  Bytes v{1, 2, 3};
  ledger.record_access(StoreTag::m_i, AccessOp::write, Origin::enclave, l, 3, &v);
  CHECK(ledger.trace()[0].value == nullptr);
  ledger.set_retain_values(true);
  ledger.record_access(StoreTag::m_i, AccessOp::write, Origin::enclave, l, 3, &v);
  REQUIRE(ledger.trace()[1].value != nullptr);
  CHECK(*ledger.trace()[1].value == v);
}

TEST_CASE("counter CSV lists all four phases with stable names") {
  CallLedger ledger;
  ledger.set_phase(Phase::setup);
  ledger.ecall(32);
  ledger.set_phase(Phase::update_del);
  ledger.ecall(9);
  std::ostringstream out;
  ledger.write_csv(out);
  CHECK(out.str() ==
        "phase,ecalls,ocalls,bytes_in,bytes_out\n"
        "setup,1,0,32,0\n"
        "update_add,0,0,0,0\n"
        "update_del,1,0,9,0\n"
        "search,0,0,0,0\n");
}

TEST_CASE("trace CSV hex-encodes labels") {
  CallLedger ledger;
  std::array<uint8_t, 16> l{};
  l[0] = 0x0f;
  l[15] = 0xa0;
  ledger.record_access(StoreTag::m_c, AccessOp::read, Origin::enclave, l, 36);
  std::ostringstream out;
  ledger.write_trace_csv(out);
  auto text = out.str();
  CHECK(text.find("t,op,structure,label,value_size\n") == 0);
  CHECK(text.find("read") != std::string::npos);
  CHECK(text.find("M_c") != std::string::npos);
  CHECK(text.find("0f000000000000000000000000000000a0") == std::string::npos);  // 16 bytes, not 17
  CHECK(text.find("0f0000000000000000000000000000a0") != std::string::npos);
  CHECK(text.find(",36") != std::string::npos);
}

TEST_CASE("enum names round-trip to the labels used in reports") {
  CHECK(std::string(to_string(Phase::setup)) == "setup");
  CHECK(std::string(to_string(Phase::update_add)) == "update_add");
  CHECK(std::string(to_string(Phase::update_del)) == "update_del");
  CHECK(std::string(to_string(Phase::search)) == "search");
  CHECK(std::string(to_string(StoreTag::m_i)) == "M_I");
  CHECK(std::string(to_string(StoreTag::m_c)) == "M_c");
  CHECK(std::string(to_string(StoreTag::r)) == "R");
  CHECK(std::string(to_string(AccessOp::read)) == "read");
  CHECK(std::string(to_string(AccessOp::write)) == "write");
  CHECK(std::string(to_string(AccessOp::del)) == "delete");
  CHECK(std::string(to_string(Origin::client)) == "client");
  CHECK(std::string(to_string(Origin::enclave)) == "enclave");
  CHECK(std::string(to_string(Origin::server)) == "server");
}
