#include "medsim/protocol.hpp"

#include <algorithm>

#include "medsim/subset.hpp"

namespace medsim {

RecordTable make_table(const SimConfig& cfg) {
  return RecordTable(cfg.n, std::vector<int>(cfg.rho + 1, 0));
}

void clear_table(RecordTable& t) {
  for (auto& row : t) std::fill(row.begin(), row.end(), 0);
}

RoundKind round_kind(const SimConfig& cfg, int round) {
  if (round > cfg.r_mon) return RoundKind::Dissem;
  if (round == 1) return RoundKind::Slots;
  if (round == cfg.r_mon) return RoundKind::Judgment;
  return (round % 2 == 0) ? RoundKind::Request : RoundKind::Response;
}

bool inconsistent(const SimConfig& cfg, int id, const RecordTable& sent,
                  const RecordTable& received, const std::vector<int>& expected) {
  // (a) forwarded outside the prescribed subset
  for (int l = 0; l < cfg.n; ++l) {
    if (sent[l][id] != 0 &&
        std::find(expected.begin(), expected.end(), l) == expected.end()) {
      return true;
    }
  }
  // earliest reception, if any
  int first = 0;
  for (int l = 0; l < cfg.n; ++l) {
    int r = received[l][id];
    if (r != 0 && (first == 0 || r < first)) first = r;
  }
  if (first != 0) {
    // (b) reception with a forwarding obligation, some prescribed forward
    // missing or mistimed
    int age = age_of(cfg, id, first);
    if (age >= 1 && age <= cfg.delta_age - 1) {
      for (int l : expected) {
        if (sent[l][id] != first + 1) return true;
      }
    }
    return false;
  }
  // (c) forwarded but never received
  for (int l = 0; l < cfg.n; ++l) {
    if (sent[l][id] != 0) return true;
  }
  return false;
}

void NodeState::init(const SimConfig& cfg, int self_id) {
  self = self_id;
  stat.assign(cfg.n, 0);
  stat_prev.assign(cfg.n, 0);
  re = make_table(cfg);
  se = make_table(cfg);
  re_prev = make_table(cfg);
  se_prev = make_table(cfg);
  miss.assign(cfg.n_seq + 1, 0);
  pend.assign(cfg.rho + 1, {});
  first_seen.assign(cfg.rho + 1, 0);
  rec.assign(cfg.rho + 1, 0);
  sent_bits.assign(cfg.rho + 1, {});
  keys.assign(cfg.n, Key{});
  known_mask = 0;
  punished = 0;
  self_bad = false;
  subset_cache.assign(cfg.rho + 1, {});
  requests.clear();
  bits_dis = bits_mon = 0;
  benefit = 0;
  received_in_window = 0;
}

void NodeState::archive_and_reset(const SimConfig&) {
  stat_prev = stat;
  re_prev = re;
  se_prev = se;
  std::fill(stat.begin(), stat.end(), 0);
  clear_table(re);
  clear_table(se);
  std::fill(miss.begin(), miss.end(), 0);
  std::fill(pend.begin(), pend.end(), PendEntry{});
  std::fill(first_seen.begin(), first_seen.end(), 0);
  std::fill(rec.begin(), rec.end(), 0);
  for (auto& v : sent_bits) v.clear();
  punished = 0;
  known_mask = 0;
  self_bad = false;
  requests.clear();
  benefit = 0;
  received_in_window = 0;
  // the engine archives before emitting the new stage's round-1 slots, so a
  // reset here starts the new stage's bit accounting from zero
  bits_dis = bits_mon = 0;
}

const std::vector<int>& NodeState::subset_for(const SimConfig& cfg, int id) {
  auto& entry = subset_cache[id];
  if (entry.empty()) entry = expand(seed, id, self, cfg.n, cfg.f);
  return entry;
}

void MediatorState::init(const SimConfig& cfg) {
  accusations.clear();
  granted.clear();
  claim_sent.assign(cfg.n, make_table(cfg));
  claim_recv.assign(cfg.n, make_table(cfg));
  issued_seed.assign(cfg.n, 0);
  issued_seed_prev.assign(cfg.n, 0);
  issued_key.assign(cfg.n, Key{});
  issued_key_prev.assign(cfg.n, Key{});
}

void MediatorState::archive_and_reset(const SimConfig&) {
  issued_seed_prev = issued_seed;
  issued_key_prev = issued_key;
  accusations.clear();
  granted.clear();
  incomplete.clear();
  for (auto& t : claim_sent) clear_table(t);
  for (auto& t : claim_recv) clear_table(t);
}

bool dissemination_valid(const SimConfig& cfg, const Message& m, int round) {
  if (m.kind != MsgKind::Dissemination) return false;
  if (round_kind(cfg, round) != RoundKind::Dissem) return false;
  if (m.tuples.empty()) return false;
  std::vector<char> seen(cfg.rho + 1, 0);
  for (const Tuple& t : m.tuples) {
    if (t.id < 1 || t.id > cfg.rho) return false;
    if (seen[t.id]) return false;  // duplicate id in one bundle
    seen[t.id] = 1;
    int age = age_of(cfg, t.id, round);
    if (age < 1 || age > cfg.delta_age) return false;
  }
  return true;
}

bool slot_bundle_valid(const SimConfig& cfg, int sender,
                       const std::vector<const Message*>& bundle) {
  if (static_cast<int>(bundle.size()) != cfg.n - 1) return false;
  std::vector<char> accused(cfg.n, 0);
  for (const Message* m : bundle) {
    if (m->kind == MsgKind::Padding) {
      if (m->pad_bits != cfg.slot_bits()) return false;
    } else if (m->kind == MsgKind::Accusation) {
      if (m->target < 0 || m->target >= cfg.n) return false;
      if (m->target == sender) return false;
      if (accused[m->target]) return false;
      accused[m->target] = 1;
    } else {
      return false;
    }
  }
  return true;
}

bool response_block_valid(const SimConfig& cfg, int subject, int seqno,
                          const std::vector<const Message*>& block) {
  long long total = 0;
  bool have_dir[2] = {false, false};
  int lo = (seqno - 1) * cfg.per_seq + 1;
  int hi = seqno * cfg.per_seq;
  for (const Message* m : block) {
    if (m->kind == MsgKind::Padding) {
      if (m->subject != subject || m->pad_bits < 0) return false;
      total += m->pad_bits;
    } else if (m->kind == MsgKind::Report) {
      if (m->subject != subject) return false;
      int d = static_cast<int>(m->dir);
      if (have_dir[d]) return false;
      have_dir[d] = true;
      if (static_cast<int>(m->entries.size()) > cfg.per_seq) return false;
      std::vector<char> seen(cfg.per_seq, 0);
      for (auto [id, r] : m->entries) {
        if (id < lo || id > hi) return false;
        if (seen[id - lo]) return false;
        seen[id - lo] = 1;
        if (r <= cfg.r_mon || r > cfg.rounds_per_stage()) return false;
      }
      total += message_bits(*m, cfg);
    } else {
      return false;
    }
  }
  return total == cfg.report_block_bits();
}

}  // namespace medsim
