#include "medsim/sim.hpp"

#include <algorithm>
#include <utility>
#include <ostream>
#include <sstream>

#include "medsim/rng.hpp"
#include "medsim/subset.hpp"

namespace medsim {

const char* dev_name(DevKind k) {
  switch (k) {
    case DevKind::DropForwardAll: return "drop-forward-all";
    case DevKind::DropForwardId: return "drop-forward-id";
    case DevKind::WrongSubset: return "wrong-subset";
    case DevKind::PrematureSend: return "premature-send";
    case DevKind::InvalidMessage: return "invalid-message";
    case DevKind::WithholdAccusation: return "withhold-accusation";
    case DevKind::WithholdReport: return "withhold-report";
    case DevKind::FalsifyReport: return "falsify-report";
  }
  return "?";
}

namespace {

uint64_t payload_mask(const SimConfig& cfg) {
  return cfg.payload_bits >= 64 ? ~uint64_t{0}
                                : (uint64_t{1} << cfg.payload_bits) - 1;
}

// Forward content staged for emission, before per-recipient ciphering.
struct Emit {
  int id;
  Payload base;
  std::vector<int> recips;
};

class Runner {
 public:
  Runner(const SimConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {
    plans_ = opt.script;
    if (opt.plan) plans_.push_back(*opt.plan);
    for (DeviationPlan& p : plans_) resolve_round(p);
    nodes_.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) nodes_[i].init(cfg, i);
    med_.init(cfg);
    trace_.cfg = cfg;
    trace_.stages = opt.stages;
    trace_.full = opt.full_trace;
  }

  Trace go() {
    for (stage_ = 1; stage_ <= opt_.stages; ++stage_) {
      trace_.stage_msg_begin.push_back(trace_.messages.size());
      stage_verdicts_.clear();
      for (round_ = 1; round_ <= cfg_.rounds_per_stage(); ++round_) {
        wire_.clear();
        switch (round_kind(cfg_, round_)) {
          case RoundKind::Slots: round_slots(); break;
          case RoundKind::Request: round_request(); break;
          case RoundKind::Response: round_response(); break;
          case RoundKind::Judgment: round_judgment(); break;
          case RoundKind::Dissem: round_dissem(); break;
        }
        if (opt_.check_invariants) check_round_invariants();
      }
      harvest_stage();
    }
    return std::move(trace_);
  }

 private:
  void resolve_round(DeviationPlan& p) {
    if (p.round != 0) return;
    switch (p.kind) {
      case DevKind::WithholdAccusation:
        p.round = 1;
        break;
      case DevKind::WithholdReport:
      case DevKind::FalsifyReport:
        p.round = 2 * p.seqno + 1;
        break;
      default:
        p.round = cfg_.r_mon + std::min(12, cfg_.r_dis);
        break;
    }
  }

  const DeviationPlan* active_plan(int node) {
    for (const DeviationPlan& p : plans_) {
      if (p.node == node && p.stage == stage_ && p.round == round_) return &p;
    }
    return nullptr;
  }

  void emit(Message&& m) {
    long long bits = message_bits(m, cfg_);
    NodeState& s = nodes_[m.sender];
    if (round_kind(cfg_, round_) == RoundKind::Dissem) {
      s.bits_dis += bits;
    } else {
      s.bits_mon += bits;
    }
    if (opt_.full_trace) {
      TraceMsg tm;
      tm.stage = stage_;
      tm.round = round_;
      tm.sender = m.sender;
      tm.recipient = m.recipient;
      tm.kind = m.kind;
      tm.bits = bits;
      for (const Tuple& t : m.tuples) {
        tm.ids.push_back(t.id);
        tm.parities.push_back(t.payload.meta.parity);
        tm.genuine.push_back(t.payload.meta.genuine ? 1 : 0);
      }
      trace_.messages.push_back(std::move(tm));
    }
    wire_.push_back(std::move(m));
  }

  // ---- round 1: accusation slots, then the stage boundary ----

  void round_slots() {
    struct Built {
      std::vector<Message> msgs;
      bool valid = true;
    };
    std::vector<Built> built(cfg_.n);
    for (int i = 1; i < cfg_.n; ++i) {
      NodeState& me = nodes_[i];
      Built& b = built[i];
      for (int j = 0; j < cfg_.n; ++j) {
        if (j == i) continue;
        Message m;
        m.sender = i;
        m.recipient = 0;
        if (me.stat[j]) {
          m.kind = MsgKind::Accusation;
          m.target = j;
        } else {
          m.kind = MsgKind::Padding;
          m.pad_bits = cfg_.slot_bits();
        }
        b.msgs.push_back(std::move(m));
      }
      if (const DeviationPlan* p = active_plan(i)) {
        if (p->kind == DevKind::WithholdAccusation) {
          for (Message& m : b.msgs) {
            if (m.kind == MsgKind::Accusation && m.target == p->target) {
              m.kind = MsgKind::Padding;
              m.target = -1;
              m.pad_bits = cfg_.slot_bits();
            }
          }
        } else if (p->kind == DevKind::InvalidMessage) {
          b.msgs.pop_back();  // short bundle
        }
      }
      std::vector<const Message*> view;
      for (const Message& m : b.msgs) view.push_back(&m);
      b.valid = slot_bundle_valid(cfg_, i, view);
    }

    // Stage boundary: everything monitored this stage describes the stage
    // that just ended, so archive before resetting.
    for (NodeState& s : nodes_) s.archive_and_reset(cfg_);
    med_.archive_and_reset(cfg_);

    for (int i = 1; i < cfg_.n; ++i) {
      for (Message& m : built[i].msgs) emit(std::move(m));
      if (!built[i].valid) {
        nodes_[i].stat[i] = 1;
        nodes_[i].self_bad = true;
      }
    }

    // Mediator checks each bundle; malformed ones are ignored wholesale and
    // remembered against the sender for next stage's verdict.
    for (int i = 1; i < cfg_.n; ++i) {
      std::vector<const Message*> bundle;
      for (const Message& m : wire_) {
        if (m.sender == i) bundle.push_back(&m);
      }
      if (slot_bundle_valid(cfg_, i, bundle)) {
        for (const Message* m : bundle) {
          if (m->kind == MsgKind::Accusation) {
            med_.accusations.push_back({i, m->target});
          }
        }
      } else {
        nodes_[0].stat[i] = 1;
      }
    }
  }

  // ---- even monitoring rounds: audit draws ----

  void round_request() {
    int k = round_ / 2;
    for (int j = 1; j < cfg_.n; ++j) {
      Substream draw(cfg_.master_seed, Stream::Monitor, stage_, j, k);
      if (!draw.bernoulli(cfg_.p_mon)) continue;
      med_.granted.push_back({j, k});
      for (int l = 1; l < cfg_.n; ++l) {
        if (l == j) continue;
        Message m;
        m.kind = MsgKind::MonitorRequest;
        m.sender = 0;
        m.recipient = l;
        m.subject = j;
        m.seqno = k;
        emit(std::move(m));
        nodes_[l].requests.push_back({j, k});
      }
    }
  }

  // ---- odd monitoring rounds: responses about the previous stage ----

  std::vector<Message> honest_block(int i, int subject, int seqno) {
    NodeState& me = nodes_[i];
    int lo = (seqno - 1) * cfg_.per_seq + 1;
    int hi = seqno * cfg_.per_seq;
    Message recv_rep, sent_rep;
    recv_rep.kind = sent_rep.kind = MsgKind::Report;
    recv_rep.sender = sent_rep.sender = i;
    recv_rep.recipient = sent_rep.recipient = 0;
    recv_rep.subject = sent_rep.subject = subject;
    recv_rep.dir = ReportDir::Received;
    sent_rep.dir = ReportDir::Sent;
    for (int id = lo; id <= hi; ++id) {
      if (me.re_prev[subject][id]) recv_rep.entries.push_back({id, me.re_prev[subject][id]});
      if (me.se_prev[subject][id]) sent_rep.entries.push_back({id, me.se_prev[subject][id]});
    }
    return finish_block(i, subject, std::move(recv_rep), std::move(sent_rep));
  }

  // Fabricated response claiming the subject delivered the whole sequence at
  // age one and that the responder forwarded every id straight to the subject.
  // Under an (incorrect) cross-reading these entries would convict the
  // responder; under correct attribution they only describe the subject.
  std::vector<Message> fabricated_block(int i, int subject, int seqno) {
    int lo = (seqno - 1) * cfg_.per_seq + 1;
    int hi = seqno * cfg_.per_seq;
    Message recv_rep, sent_rep;
    recv_rep.kind = sent_rep.kind = MsgKind::Report;
    recv_rep.sender = sent_rep.sender = i;
    recv_rep.recipient = sent_rep.recipient = 0;
    recv_rep.subject = sent_rep.subject = subject;
    recv_rep.dir = ReportDir::Received;
    sent_rep.dir = ReportDir::Sent;
    for (int id = lo; id <= hi; ++id) {
      recv_rep.entries.push_back({id, cfg_.r_mon + id});
      sent_rep.entries.push_back({id, cfg_.r_mon + id + 1});
    }
    return finish_block(i, subject, std::move(recv_rep), std::move(sent_rep));
  }

  std::vector<Message> padding_block(int i, int subject) {
    Message pad;
    pad.kind = MsgKind::Padding;
    pad.sender = i;
    pad.recipient = 0;
    pad.subject = subject;
    pad.pad_bits = cfg_.report_block_bits();
    return {std::move(pad)};
  }

  std::vector<Message> finish_block(int i, int subject, Message recv_rep,
                                    Message sent_rep) {
    std::vector<Message> out;
    long long used = 0;
    if (!recv_rep.entries.empty()) {
      used += message_bits(recv_rep, cfg_);
      out.push_back(std::move(recv_rep));
    }
    if (!sent_rep.entries.empty()) {
      used += message_bits(sent_rep, cfg_);
      out.push_back(std::move(sent_rep));
    }
    long long pad = cfg_.report_block_bits() - used;
    if (pad > 0) {
      Message m;
      m.kind = MsgKind::Padding;
      m.sender = i;
      m.recipient = 0;
      m.subject = subject;
      m.pad_bits = static_cast<int>(pad);
      out.push_back(std::move(m));
    }
    return out;
  }

  void round_response() {
    int k = (round_ - 1) / 2;
    for (int i = 1; i < cfg_.n; ++i) {
      NodeState& me = nodes_[i];
      if (me.self_bad) {
        me.requests.clear();
        continue;
      }
      const DeviationPlan* p = active_plan(i);
      for (auto [subject, kk] : me.requests) {
        std::vector<Message> block;
        if (opt_.persistent.node == i && opt_.persistent.falsify_reports) {
          block = fabricated_block(i, subject, kk);
        } else {
          block = honest_block(i, subject, kk);
        }
        if (p && p->target == subject && p->seqno == kk) {
          if (p->kind == DevKind::WithholdReport) {
            block = padding_block(i, subject);
          } else if (p->kind == DevKind::FalsifyReport) {
            block = p->self_incriminate ? fabricated_block(i, subject, kk)
                                        : padding_block(i, subject);
          }
        }
        for (Message& m : block) emit(std::move(m));
      }
      me.requests.clear();
    }

    // Mediator side: every granted (subject, seq) of this round owes a block
    // from every other player; merge valid ones, flag the rest.
    std::vector<std::vector<const Message*>> by_sender(cfg_.n);
    for (const Message& m : wire_) by_sender[m.sender].push_back(&m);
    for (int l = 1; l < cfg_.n; ++l) {
      std::vector<char> claimed(by_sender[l].size(), 0);
      for (auto [subject, kk] : med_.granted) {
        if (kk != k || subject == l) continue;
        std::vector<const Message*> block;
        for (size_t mi = 0; mi < by_sender[l].size(); ++mi) {
          if (by_sender[l][mi]->subject == subject) {
            block.push_back(by_sender[l][mi]);
            claimed[mi] = 1;
          }
        }
        if (response_block_valid(cfg_, subject, kk, block)) {
          for (const Message* m : block) {
            if (m->kind != MsgKind::Report) continue;
            RecordTable& table = m->dir == ReportDir::Received
                                     ? med_.claim_sent[subject]
                                     : med_.claim_recv[subject];
            for (auto [id, r] : m->entries) table[l][id] = r;
          }
        } else {
          nodes_[0].stat[l] = 1;
          med_.incomplete.push_back({subject, kk});
        }
      }
      for (size_t mi = 0; mi < by_sender[l].size(); ++mi) {
        if (!claimed[mi]) nodes_[0].stat[l] = 1;  // unsolicited response
      }
    }
  }

  // ---- last monitoring round: verdicts, then fresh seeds and keys ----

  void round_judgment() {
    std::vector<int> guilty;
    for (int j = 1; j < cfg_.n; ++j) {
      bool g = nodes_[0].stat_prev[j] != 0;
      for (auto [accuser, target] : med_.accusations) {
        if (target == j && accuser != j) g = true;
      }
      if (!g) {
        // The mediator's own records enter the evidence like any observer's.
        med_.claim_sent[j][0] = nodes_[0].re_prev[j];
        med_.claim_recv[j][0] = nodes_[0].se_prev[j];
        for (auto [subject, kk] : med_.granted) {
          if (subject != j || g) continue;
          if (std::find(med_.incomplete.begin(), med_.incomplete.end(),
                        std::make_pair(subject, kk)) != med_.incomplete.end()) {
            continue;
          }
          int lo = (kk - 1) * cfg_.per_seq + 1;
          int hi = kk * cfg_.per_seq;
          for (int id = lo; id <= hi && !g; ++id) {
            std::vector<int> expected =
                expand(med_.issued_seed_prev[j], id, j, cfg_.n, cfg_.f);
            if (inconsistent(cfg_, id, med_.claim_sent[j], med_.claim_recv[j],
                             expected)) {
              g = true;
            }
          }
        }
      }
      if (g) guilty.push_back(j);
    }
    stage_verdicts_ = guilty;
    uint32_t mask = 0;
    for (int j : guilty) mask |= uint32_t{1} << j;
    for (int j : guilty) {
      for (int l = 1; l < cfg_.n; ++l) {
        Message m;
        m.kind = MsgKind::Verdict;
        m.sender = 0;
        m.recipient = l;
        m.target = j;
        emit(std::move(m));
      }
    }

    for (int x = 0; x < cfg_.n; ++x) {
      med_.issued_seed[x] = Substream(cfg_.master_seed, Stream::SeedIssue, stage_, x).next();
    }
    for (int x = 1; x < cfg_.n; ++x) {
      Substream draw(cfg_.master_seed, Stream::KeyIssue, stage_, x);
      Key key;
      key.owner = x;
      key.stage = stage_;
      bool fresh = false;
      while (!fresh) {
        key.material[0] = draw.next();
        key.material[1] = draw.next();
        fresh = true;
        for (int y = 1; y < x; ++y) {
          if (med_.issued_key[y].material[0] == key.material[0] &&
              med_.issued_key[y].material[1] == key.material[1]) {
            fresh = false;
          }
        }
      }
      med_.issued_key[x] = key;
    }

    for (int x = 1; x < cfg_.n; ++x) {
      Message m;
      m.kind = MsgKind::SeedDelivery;
      m.sender = 0;
      m.recipient = x;
      emit(std::move(m));
      for (int l = 1; l < cfg_.n; ++l) {
        if (l == x) continue;
        Message km;
        km.kind = MsgKind::KeyDelivery;
        km.sender = 0;
        km.recipient = l;
        km.key_owner = x;
        emit(std::move(km));
      }
    }

    for (int x = 0; x < cfg_.n; ++x) {
      NodeState& s = nodes_[x];
      s.punished = mask;
      s.seed = med_.issued_seed[x];
      s.subset_cache.assign(cfg_.rho + 1, {});
      s.known_mask = 0;
      for (int o = 1; o < cfg_.n; ++o) {
        if (o == x) continue;
        s.keys[o] = med_.issued_key[o];
        s.known_mask |= uint32_t{1} << o;
      }
    }
    // Node 0 issued the keys, so it also holds its own players' full set.
  }

  // ---- dissemination rounds ----

  void round_dissem() {
    // Source introduction: one fresh event per round while ids remain.
    int intro = round_ - cfg_.r_mon;
    if (intro >= 1 && intro <= cfg_.rho) {
      NodeState& src = nodes_[0];
      Payload base;
      base.bits = Substream(cfg_.master_seed, Stream::Payload, stage_, 0,
                            static_cast<uint64_t>(intro))
                      .next() &
                  payload_mask(cfg_);
      base.meta.event_id = intro;
      for (int y : src.subset_for(cfg_, intro)) {
        Message m;
        m.kind = MsgKind::Dissemination;
        m.sender = 0;
        m.recipient = y;
        Payload pl = base;
        if (src.punished & (uint32_t{1} << y)) pl = apply(src.keys[y], pl, cfg_.payload_bits);
        m.tuples.push_back({intro, pl});
        if (src.se[y][intro] == 0) src.se[y][intro] = round_;
        emit(std::move(m));
      }
    }

    for (int i = 1; i < cfg_.n; ++i) {
      NodeState& me = nodes_[i];
      if (me.self_bad) continue;

      std::vector<Emit> plan_emission;
      for (int id = 1; id <= cfg_.rho; ++id) {
        if (!me.pend[id].present) continue;
        me.pend[id].present = false;
        if (me.miss[seq_of(cfg_, id)]) continue;
        if (age_of(cfg_, id, round_) > cfg_.delta_age) continue;
        plan_emission.push_back({id, me.pend[id].payload, me.subset_for(cfg_, id)});
      }

      if (opt_.persistent.node == i && opt_.persistent.drop_seqs > 0) {
        std::erase_if(plan_emission, [&](const Emit& e) {
          return seq_of(cfg_, e.id) <= opt_.persistent.drop_seqs;
        });
      }

      const DeviationPlan* p = active_plan(i);
      bool invalid_message = false;
      if (p) apply_dissem_plan(*p, me, plan_emission, invalid_message);

      std::vector<Message> msgs;
      if (invalid_message) {
        msgs.push_back(junk_message(*p, i));
      } else {
        std::vector<std::vector<Tuple>> bundles(cfg_.n);
        for (const Emit& e : plan_emission) {
          for (int y : e.recips) {
            Payload pl = e.base;
            if (me.punished & (uint32_t{1} << y)) pl = apply(me.keys[y], pl, cfg_.payload_bits);
            bundles[y].push_back({e.id, pl});
          }
        }
        for (int y = 0; y < cfg_.n; ++y) {
          if (bundles[y].empty()) continue;
          Message m;
          m.kind = MsgKind::Dissemination;
          m.sender = i;
          m.recipient = y;
          m.tuples = std::move(bundles[y]);
          msgs.push_back(std::move(m));
        }
      }

      bool bad = false;
      for (Message& m : msgs) {
        if (dissemination_valid(cfg_, m, round_)) {
          for (const Tuple& t : m.tuples) {
            if (me.se[m.recipient][t.id] == 0) me.se[m.recipient][t.id] = round_;
            me.sent_bits[t.id].push_back({t.payload.bits, round_});
          }
        } else {
          bad = true;
        }
        emit(std::move(m));
      }
      if (bad) {
        me.stat[i] = 1;
        me.self_bad = true;
      }
    }

    deliver_dissem();
  }

  void apply_dissem_plan(const DeviationPlan& p, NodeState& me,
                         std::vector<Emit>& plan_emission, bool& invalid_message) {
    auto pick = [&]() -> std::vector<Emit>::iterator {
      if (p.id > 0) {
        for (auto it = plan_emission.begin(); it != plan_emission.end(); ++it) {
          if (it->id == p.id) return it;
        }
        return plan_emission.end();
      }
      return plan_emission.begin();
    };
    switch (p.kind) {
      case DevKind::DropForwardAll:
        plan_emission.clear();
        break;
      case DevKind::DropForwardId: {
        auto it = pick();
        if (it != plan_emission.end()) plan_emission.erase(it);
        break;
      }
      case DevKind::WrongSubset: {
        auto it = pick();
        if (it == plan_emission.end()) break;
        if (!p.replacement.empty()) {
          it->recips = p.replacement;
        } else {
          // Swap the lowest prescribed recipient for the lowest outsider.
          std::vector<int>& r = it->recips;
          for (int v = 0; v < cfg_.n; ++v) {
            if (v == me.self) continue;
            if (std::find(r.begin(), r.end(), v) == r.end()) {
              r.erase(r.begin());
              r.push_back(v);
              std::sort(r.begin(), r.end());
              break;
            }
          }
        }
        break;
      }
      case DevKind::PrematureSend: {
        int chosen = 0;
        for (int id = 1; id <= cfg_.rho && chosen == 0; ++id) {
          if (p.id > 0 && id != p.id) continue;
          int age = age_of(cfg_, id, round_);
          if (age < 1 || age > cfg_.delta_age - 1) continue;
          if (me.first_seen[id]) continue;
          bool sent = false;
          for (int y = 0; y < cfg_.n; ++y) sent = sent || me.se[y][id] != 0;
          if (!sent) chosen = id;
        }
        if (chosen == 0) break;
        Payload fab;
        fab.bits = Substream(cfg_.master_seed, Stream::Fabricate, stage_, me.self,
                             static_cast<uint64_t>(chosen))
                       .next() &
                   payload_mask(cfg_);
        fab.meta.event_id = chosen;
        fab.meta.genuine = false;
        plan_emission.push_back({chosen, fab, me.subset_for(cfg_, chosen)});
        std::sort(plan_emission.begin(), plan_emission.end(),
                  [](const Emit& a, const Emit& b) { return a.id < b.id; });
        break;
      }
      case DevKind::InvalidMessage:
        invalid_message = true;
        break;
      default:
        break;
    }
  }

  Message junk_message(const DeviationPlan& p, int sender) {
    Message m;
    m.kind = MsgKind::Dissemination;
    m.sender = sender;
    m.recipient = (p.target >= 0 && p.target < cfg_.n && p.target != sender)
                      ? p.target
                      : (sender == 0 ? 1 : 0);
    int id = p.id > 0 ? p.id : 1;
    for (int cand = 1; cand <= cfg_.rho && p.id <= 0; ++cand) {
      int age = age_of(cfg_, cand, round_);
      if (age >= 1 && age <= cfg_.delta_age) {
        id = cand;
        break;
      }
    }
    Payload pl;
    pl.meta.event_id = id;
    m.tuples.push_back({id, pl});
    m.tuples.push_back({id, pl});  // duplicate id: invalid by shape
    return m;
  }

  void deliver_dissem() {
    for (int y = 0; y < cfg_.n; ++y) {
      NodeState& me = nodes_[y];
      std::vector<const Message*> inbox;
      for (const Message& m : wire_) {
        if (m.recipient == y) inbox.push_back(&m);
      }
      std::vector<char> ok(inbox.size(), 1);
      std::vector<int> dis_count(cfg_.n, 0);
      for (const Message* m : inbox) {
        if (m->kind == MsgKind::Dissemination) dis_count[m->sender]++;
      }
      for (size_t mi = 0; mi < inbox.size(); ++mi) {
        const Message& m = *inbox[mi];
        if (!dissemination_valid(cfg_, m, round_) || dis_count[m.sender] > 1) {
          ok[mi] = 0;
          me.stat[m.sender] = 1;
        }
      }

      if (y != 0) scan_obligations(me);

      for (size_t mi = 0; mi < inbox.size(); ++mi) {
        if (!ok[mi]) continue;
        const Message& m = *inbox[mi];
        for (const Tuple& t : m.tuples) {
          if (me.re[m.sender][t.id] == 0) me.re[m.sender][t.id] = round_;
        }
      }
      if (y == 0) continue;

      for (size_t mi = 0; mi < inbox.size(); ++mi) {
        if (!ok[mi]) continue;
        const Message& m = *inbox[mi];
        for (const Tuple& t : m.tuples) {
          if (!me.first_seen[t.id]) {
            me.first_seen[t.id] = 1;
            me.received_in_window++;
            Payload pl = t.payload;
            if (me.punished & (uint32_t{1} << m.sender)) {
              pl = apply(me.keys[m.sender], pl, cfg_.payload_bits);
            }
            me.pend[t.id] = {true, pl, round_};
          }
          maybe_retrieve(me, t);
        }
      }
    }
  }

  void maybe_retrieve(NodeState& me, const Tuple& t) {
    if (me.rec[t.id]) return;
    const PayloadMeta& meta = t.payload.meta;
    if (!retrievable(meta, me.known_mask, me.self)) return;
    // A tuple that echoes bits this node itself sent out earlier carries no
    // new value.
    for (auto [bits, r] : me.sent_bits[t.id]) {
      if (bits == t.payload.bits && r < round_) return;
    }
    me.rec[t.id] = 1;
    me.benefit++;
  }

  void scan_obligations(NodeState& me) {
    // Only ids whose live window touches this round can change status; after
    // age delta+1 no further record about the id can appear.
    int lo = round_ - cfg_.r_mon - cfg_.delta_age;
    int hi = round_ - cfg_.r_mon;
    if (lo < 1) lo = 1;
    if (hi > cfg_.rho) hi = cfg_.rho;
    for (int id = lo; id <= hi; ++id) {
      int s = seq_of(cfg_, id);
      if (me.miss[s]) continue;
      if (inconsistent(cfg_, id, me.se, me.re, me.subset_for(cfg_, id))) {
        me.miss[s] = 1;
      }
    }
  }

  // ---- bookkeeping ----

  void check_round_invariants() {
    for (int i = 0; i < cfg_.n; ++i) {
      bool self_bad = nodes_[i].stat[i] != 0;
      bool seen = false;
      for (int j = 0; j < cfg_.n; ++j) {
        if (j != i && nodes_[j].stat[i] != 0) seen = true;
      }
      if (self_bad != seen) {
        trace_.violations.push_back(
            "status mismatch: stage " + std::to_string(stage_) + " round " +
            std::to_string(round_) + " node " + std::to_string(i));
      }
    }
    if (round_kind(cfg_, round_) != RoundKind::Dissem) return;
    for (int j = 1; j < cfg_.n; ++j) {
      const NodeState& s = nodes_[j];
      uint32_t expect = (s.punished >> j) & 1 ? uint32_t{1} << j : 0;
      for (int id = 1; id <= cfg_.rho; ++id) {
        if (s.pend[id].present && s.pend[id].payload.meta.parity != expect) {
          trace_.violations.push_back(
              "pend cipher state off: stage " + std::to_string(stage_) +
              " round " + std::to_string(round_) + " node " + std::to_string(j) +
              " id " + std::to_string(id));
        }
      }
    }
  }

  void harvest_stage() {
    StageStats st;
    st.bits_dis.resize(cfg_.n);
    st.bits_mon.resize(cfg_.n);
    st.benefit.resize(cfg_.n);
    st.received.resize(cfg_.n);
    for (int i = 0; i < cfg_.n; ++i) {
      st.bits_dis[i] = nodes_[i].bits_dis;
      st.bits_mon[i] = nodes_[i].bits_mon;
      st.benefit[i] = nodes_[i].benefit;
      st.received[i] = nodes_[i].received_in_window;
    }
    st.verdicts = stage_verdicts_;
    st.granted = med_.granted;
    trace_.per_stage.push_back(std::move(st));
    if (opt_.full_trace) trace_.state_digest.push_back(digest());
  }

  uint64_t digest() const {
    uint64_t h = 0x84222325cbf29ce4ULL;
    auto mix = [&h](uint64_t v) { h = mix64(h ^ v); };
    for (const NodeState& s : nodes_) {
      for (int8_t v : s.stat) mix(static_cast<uint64_t>(v));
      for (char v : s.miss) mix(static_cast<uint64_t>(v));
      for (const auto& row : s.re)
        for (int v : row) mix(static_cast<uint64_t>(v));
      for (const auto& row : s.se)
        for (int v : row) mix(static_cast<uint64_t>(v));
      for (int id = 1; id <= static_cast<int>(s.rec.size()) - 1; ++id) {
        mix(s.rec[id]);
        mix(s.first_seen[id]);
      }
      mix(s.punished);
      mix(static_cast<uint64_t>(s.benefit));
      mix(static_cast<uint64_t>(s.bits_dis));
      mix(static_cast<uint64_t>(s.bits_mon));
    }
    return h;
  }

  const SimConfig& cfg_;
  RunOptions opt_;
  std::vector<DeviationPlan> plans_;
  Trace trace_;
  std::vector<NodeState> nodes_;
  MediatorState med_;
  std::vector<Message> wire_;
  std::vector<int> stage_verdicts_;
  int stage_ = 0, round_ = 0;
};

}  // namespace

Trace run(const SimConfig& cfg, const RunOptions& opt) {
  Runner r(cfg, opt);
  return r.go();
}

std::pair<Trace, Trace> paired_run(const SimConfig& cfg, int stages,
                                   const DeviationPlan& plan,
                                   const std::vector<DeviationPlan>& script) {
  RunOptions conform;
  conform.stages = stages;
  conform.script = script;
  RunOptions deviate = conform;
  deviate.plan = &plan;
  return {run(cfg, conform), run(cfg, deviate)};
}

namespace {

template <class T>
void join(std::ostream& os, const std::vector<T>& v) {
  if (v.empty()) {
    os << "-";
    return;
  }
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << +v[i];
  }
}

}  // namespace

void export_trace(const Trace& tr, std::ostream& os) {
  const SimConfig& c = tr.cfg;
  os << "trace-v1\n";
  std::ostringstream num;
  num.precision(17);
  num << c.p_mon << ";" << c.delta_disc;
  std::string dbl = num.str();
  size_t cut = dbl.find(';');
  os << "cfg;n=" << c.n << ";f=" << c.f << ";rho=" << c.rho << ";delta="
     << c.delta_age << ";m=" << c.per_seq << ";S=" << c.n_seq << ";pmon="
     << dbl.substr(0, cut) << ";c=" << c.payload_bits << ";alpha="
     << c.alpha.str() << ";beta=" << c.beta.str() << ";disc="
     << dbl.substr(cut + 1) << ";rmon=" << c.r_mon << ";rdis=" << c.r_dis
     << ";seed=" << c.master_seed << ";stages=" << tr.stages << "\n";
  for (int s = 1; s <= tr.stages; ++s) {
    const StageStats& st = tr.per_stage[s - 1];
    os << "S;" << s << ";verd=";
    join(os, st.verdicts);
    os << ";gr=";
    if (st.granted.empty()) {
      os << "-";
    } else {
      for (size_t i = 0; i < st.granted.size(); ++i) {
        if (i) os << ",";
        os << st.granted[i].first << "." << st.granted[i].second;
      }
    }
    os << ";ben=";
    join(os, st.benefit);
    os << ";recv=";
    join(os, st.received);
    os << ";bdis=";
    join(os, st.bits_dis);
    os << ";bmon=";
    join(os, st.bits_mon);
    if (tr.full && s - 1 < static_cast<int>(tr.state_digest.size())) {
      os << ";dig=" << tr.state_digest[s - 1];
    }
    os << "\n";
    if (tr.full) {
      size_t begin = tr.stage_msg_begin[s - 1];
      size_t end = s < tr.stages ? tr.stage_msg_begin[s] : tr.messages.size();
      for (size_t i = begin; i < end; ++i) {
        const TraceMsg& m = tr.messages[i];
        os << "M;" << m.stage << ";" << m.round << ";" << m.sender << ";"
           << m.recipient << ";" << kind_name(m.kind) << ";" << m.bits << ";";
        join(os, m.ids);
        os << ";";
        join(os, m.parities);
        os << ";";
        join(os, m.genuine);
        os << "\n";
      }
    }
  }
  for (const std::string& v : tr.violations) os << "V;" << v << "\n";
}

std::string trace_to_string(const Trace& tr) {
  std::ostringstream os;
  export_trace(tr, os);
  return os.str();
}

}  // namespace medsim
