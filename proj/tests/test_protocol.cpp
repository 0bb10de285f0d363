#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "medsim/protocol.hpp"

using namespace medsim;

namespace {

SimConfig small() {
  SimConfig cfg = default_config(16);  // m = S = 4, r_mon = 10, r_dis = 20
  cfg.n = 5;
  return cfg;
}

}  // namespace

TEST_CASE("round phases") {
  SimConfig cfg = small();
  CHECK(round_kind(cfg, 1) == RoundKind::Slots);
  CHECK(round_kind(cfg, 2) == RoundKind::Request);
  CHECK(round_kind(cfg, 3) == RoundKind::Response);
  CHECK(round_kind(cfg, 8) == RoundKind::Request);
  CHECK(round_kind(cfg, 9) == RoundKind::Response);
  CHECK(round_kind(cfg, 10) == RoundKind::Judgment);
  CHECK(round_kind(cfg, 11) == RoundKind::Dissem);
  CHECK(round_kind(cfg, 30) == RoundKind::Dissem);
}

TEST_CASE("consistency predicate over one id") {
  SimConfig cfg = small();
  const int id = 6;
  const int first = cfg.r_mon + 7;  // age 2: an obligated reception
  std::vector<int> expected = {2, 3};

  RecordTable sent = make_table(cfg);
  RecordTable received = make_table(cfg);

  // untouched id: consistent
  CHECK(!inconsistent(cfg, id, sent, received, expected));

  // clean forward to exactly the prescribed peers at the next round
  received[4][id] = first;
  sent[2][id] = first + 1;
  sent[3][id] = first + 1;
  CHECK(!inconsistent(cfg, id, sent, received, expected));

  // (a) a forward outside the prescribed subset
  sent[1][id] = first + 1;
  CHECK(inconsistent(cfg, id, sent, received, expected));
  sent[1][id] = 0;

  // (b) a prescribed peer missing entirely
  sent[3][id] = 0;
  CHECK(inconsistent(cfg, id, sent, received, expected));

  // (b) a prescribed peer served at the wrong round
  sent[3][id] = first + 2;
  CHECK(inconsistent(cfg, id, sent, received, expected));
  sent[3][id] = first + 1;

  // (c) forwards with no reception at all
  received[4][id] = 0;
  CHECK(inconsistent(cfg, id, sent, received, expected));
  received[4][id] = first;

  // a first reception at age delta carries no obligation
  RecordTable sent2 = make_table(cfg);
  RecordTable recv2 = make_table(cfg);
  recv2[2][id] = cfg.r_mon + id + cfg.delta_age - 1;  // age delta
  CHECK(!inconsistent(cfg, id, sent2, recv2, expected));

  // but an obligated reception with no forwards is inconsistent
  recv2[2][id] = cfg.r_mon + id;  // age 1
  CHECK(inconsistent(cfg, id, sent2, recv2, expected));
}

TEST_CASE("dissemination shape validity") {
  SimConfig cfg = small();
  int round = cfg.r_mon + 5;

  Message m;
  m.kind = MsgKind::Dissemination;
  m.sender = 1;
  m.recipient = 2;
  Tuple t;
  t.id = 4;  // age 2 at this round
  m.tuples.push_back(t);
  CHECK(dissemination_valid(cfg, m, round));

  Message empty = m;
  empty.tuples.clear();
  CHECK(!dissemination_valid(cfg, empty, round));

  Message dup = m;
  dup.tuples.push_back(t);
  CHECK(!dissemination_valid(cfg, dup, round));

  Message stale = m;
  stale.tuples[0].id = 1;  // age 5: expired
  CHECK(!dissemination_valid(cfg, stale, round));

  Message future = m;
  future.tuples[0].id = 9;  // not yet introduced
  CHECK(!dissemination_valid(cfg, future, round));

  CHECK(!dissemination_valid(cfg, m, 1));  // wrong phase

  Message wrong_kind = m;
  wrong_kind.kind = MsgKind::Padding;
  wrong_kind.pad_bits = 38;
  CHECK(!dissemination_valid(cfg, wrong_kind, round));
}

TEST_CASE("round-one slot bundles") {
  SimConfig cfg = small();
  std::vector<Message> store;
  auto slot = [&](MsgKind kind, int target) {
    Message m;
    m.kind = kind;
    m.sender = 1;
    m.recipient = 0;
    if (kind == MsgKind::Accusation) m.target = target;
    if (kind == MsgKind::Padding) m.pad_bits = cfg.slot_bits();
    store.push_back(m);
  };
  auto view = [&] {
    std::vector<const Message*> v;
    for (const Message& m : store) v.push_back(&m);
    return v;
  };

  for (int i = 0; i < cfg.n - 1; ++i) slot(MsgKind::Padding, -1);
  CHECK(slot_bundle_valid(cfg, 1, view()));

  store.clear();
  slot(MsgKind::Accusation, 3);
  for (int i = 0; i < cfg.n - 2; ++i) slot(MsgKind::Padding, -1);
  CHECK(slot_bundle_valid(cfg, 1, view()));

  store.pop_back();  // one slot short
  CHECK(!slot_bundle_valid(cfg, 1, view()));

  store.clear();
  slot(MsgKind::Accusation, 3);
  slot(MsgKind::Accusation, 3);  // duplicate target
  for (int i = 0; i < cfg.n - 3; ++i) slot(MsgKind::Padding, -1);
  CHECK(!slot_bundle_valid(cfg, 1, view()));

  store.clear();
  slot(MsgKind::Accusation, 1);  // self-accusation
  for (int i = 0; i < cfg.n - 2; ++i) slot(MsgKind::Padding, -1);
  CHECK(!slot_bundle_valid(cfg, 1, view()));
}

TEST_CASE("monitoring response blocks") {
  SimConfig cfg = small();  // block size 4*4*4 = 64 bits, reports 8 bits/entry
  const int subject = 2;
  const int seqno = 2;  // ids 5..8
  std::vector<Message> store;
  auto view = [&] {
    std::vector<const Message*> v;
    for (const Message& m : store) v.push_back(&m);
    return v;
  };
  auto report = [&](ReportDir dir, std::vector<std::pair<int, int>> entries) {
    Message m;
    m.kind = MsgKind::Report;
    m.sender = 3;
    m.recipient = 0;
    m.subject = subject;
    m.seqno = seqno;
    m.dir = dir;
    m.entries = std::move(entries);
    store.push_back(m);
  };
  auto pad = [&](int bits) {
    Message m;
    m.kind = MsgKind::Padding;
    m.sender = 3;
    m.recipient = 0;
    m.subject = subject;
    m.pad_bits = bits;
    store.push_back(m);
  };

  // nothing observed: all padding
  pad(cfg.report_block_bits());
  CHECK(response_block_valid(cfg, subject, seqno, view()));

  // two directions plus padding to the exact block size
  store.clear();
  report(ReportDir::Received, {{5, cfg.r_mon + 6}, {6, cfg.r_mon + 7}});
  report(ReportDir::Sent, {{5, cfg.r_mon + 5}});
  pad(cfg.report_block_bits() - 3 * 8);
  CHECK(response_block_valid(cfg, subject, seqno, view()));

  // wrong total
  store.pop_back();
  pad(cfg.report_block_bits() - 3 * 8 - 1);
  CHECK(!response_block_valid(cfg, subject, seqno, view()));

  // id outside the sequence
  store.clear();
  report(ReportDir::Received, {{4, cfg.r_mon + 5}});
  pad(cfg.report_block_bits() - 8);
  CHECK(!response_block_valid(cfg, subject, seqno, view()));

  // duplicate id within one report
  store.clear();
  report(ReportDir::Received, {{5, cfg.r_mon + 5}, {5, cfg.r_mon + 6}});
  pad(cfg.report_block_bits() - 2 * 8);
  CHECK(!response_block_valid(cfg, subject, seqno, view()));

  // round outside the dissemination phase
  store.clear();
  report(ReportDir::Received, {{5, cfg.r_mon}});
  pad(cfg.report_block_bits() - 8);
  CHECK(!response_block_valid(cfg, subject, seqno, view()));

  // two reports in the same direction
  store.clear();
  report(ReportDir::Received, {{5, cfg.r_mon + 5}});
  report(ReportDir::Received, {{6, cfg.r_mon + 6}});
  pad(cfg.report_block_bits() - 2 * 8);
  CHECK(!response_block_valid(cfg, subject, seqno, view()));
}

TEST_CASE("stage boundary archives and clears node state") {
  SimConfig cfg = small();
  NodeState st;
  st.init(cfg, 1);
  st.stat[3] = 1;
  st.re[2][5] = 17;
  st.se[4][5] = 18;
  st.miss[2] = 1;
  st.pend[5].present = true;
  st.first_seen[5] = 1;
  st.rec[5] = 1;
  st.benefit = 3;
  st.bits_dis = 100;
  st.bits_mon = 50;
  st.punished = 1u << 2;
  st.self_bad = true;

  st.archive_and_reset(cfg);

  CHECK(st.stat_prev[3] == 1);
  CHECK(st.re_prev[2][5] == 17);
  CHECK(st.se_prev[4][5] == 18);
  CHECK(st.stat[3] == 0);
  CHECK(st.re[2][5] == 0);
  CHECK(st.se[4][5] == 0);
  CHECK(st.miss[2] == 0);
  CHECK(!st.pend[5].present);
  CHECK(st.first_seen[5] == 0);
  CHECK(st.rec[5] == 0);
  CHECK(st.benefit == 0);
  CHECK(st.bits_dis == 0);
  CHECK(st.bits_mon == 0);
  CHECK(st.punished == 0);
  CHECK(!st.self_bad);
}

TEST_CASE("stage boundary archives mediator issuance") {
  SimConfig cfg = small();
  MediatorState med;
  med.init(cfg);
  med.issued_seed[2] = 777;
  med.issued_key[3].material[0] = 9;
  med.accusations.push_back({1, 2});
  med.granted.push_back({2, 1});
  med.claim_sent[2][1][5] = 12;

  med.archive_and_reset(cfg);

  CHECK(med.issued_seed_prev[2] == 777);
  CHECK(med.issued_key_prev[3].material[0] == 9);
  CHECK(med.accusations.empty());
  CHECK(med.granted.empty());
  CHECK(med.claim_sent[2][1][5] == 0);
}
