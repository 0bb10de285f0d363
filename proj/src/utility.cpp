#include "medsim/utility.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace medsim {

Rat stage_utility(const Trace& tr, int stage, int node) {
  const StageStats& st = tr.per_stage.at(stage - 1);
  long long bits = st.bits_dis.at(node) + st.bits_mon.at(node);
  Rat gain = tr.cfg.beta * Rat(st.benefit.at(node));
  Rat cost = tr.cfg.alpha * Rat(bits);
  return (gain - cost) / Rat(tr.cfg.rho);
}

double discounted(const std::vector<Rat>& utilities, double delta, double tail) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("discount factor must lie in (0, 1)");
  }
  double acc = 0.0;
  double w = 1.0;
  for (const Rat& u : utilities) {
    acc += w * u.to_double();
    w *= delta;
  }
  return acc + w * tail / (1.0 - delta);
}

UtilityReport utility_report(const Trace& tr, int node) {
  UtilityReport out;
  for (int s = 1; s <= tr.stages; ++s) {
    out.stage_u.push_back(stage_utility(tr, s, node));
    out.benefit.push_back(tr.per_stage[s - 1].benefit.at(node));
    out.bits.push_back(tr.per_stage[s - 1].bits_dis.at(node) +
                       tr.per_stage[s - 1].bits_mon.at(node));
  }
  double total = 0.0;
  for (const Rat& u : out.stage_u) total += u.to_double();
  out.average_u = out.stage_u.empty() ? 0.0 : total / out.stage_u.size();
  if (!out.stage_u.empty()) {
    double tail = out.stage_u.back().to_double();
    if (tr.cfg.delta_disc > 0.0) {
      out.discounted_u = discounted(out.stage_u, tr.cfg.delta_disc, tail);
    } else {
      out.discounted_u = out.stage_u.front().to_double();
    }
  }
  return out;
}

std::vector<int> rec_set_from_messages(const Trace& tr, int stage, int node) {
  if (!tr.full) {
    throw std::invalid_argument("message-level retrieval needs a full trace");
  }
  const SimConfig& cfg = tr.cfg;
  size_t begin = tr.stage_msg_begin.at(stage - 1);
  size_t end = stage < tr.stages ? tr.stage_msg_begin[stage] : tr.messages.size();

  // Revalidate dissemination shape from the record alone, the way any
  // recipient would have.
  auto shape_ok = [&](const TraceMsg& m) {
    if (m.kind != MsgKind::Dissemination) return false;
    if (round_kind(cfg, m.round) != RoundKind::Dissem) return false;
    if (m.ids.empty()) return false;
    std::vector<char> seen(cfg.rho + 1, 0);
    for (int id : m.ids) {
      if (id < 1 || id > cfg.rho) return false;
      if (seen[id]) return false;
      seen[id] = 1;
      int age = age_of(cfg, id, m.round);
      if (age < 1 || age > cfg.delta_age) return false;
    }
    return true;
  };
  std::map<std::tuple<int, int, int>, int> bundles;  // (round, sender, recipient)
  for (size_t i = begin; i < end; ++i) {
    const TraceMsg& m = tr.messages[i];
    if (m.kind == MsgKind::Dissemination) {
      bundles[{m.round, m.sender, m.recipient}]++;
    }
  }
  auto valid = [&](const TraceMsg& m) {
    return shape_ok(m) && bundles[{m.round, m.sender, m.recipient}] == 1;
  };

  // The node's own outgoing payload identities: for payloads of one origin,
  // equal (genuine, parity) means equal raw bits, which is the only equality
  // the echo rule can encounter on a genuine reception.
  struct Sent {
    uint32_t parity;
    bool genuine;
    int round;
  };
  std::vector<std::vector<Sent>> sent(cfg.rho + 1);
  for (size_t i = begin; i < end; ++i) {
    const TraceMsg& m = tr.messages[i];
    if (m.sender != node || !valid(m)) continue;
    for (size_t k = 0; k < m.ids.size(); ++k) {
      sent[m.ids[k]].push_back({m.parities[k], m.genuine[k] != 0, m.round});
    }
  }

  uint32_t known = 0;
  for (int o = 1; o < cfg.n; ++o) {
    if (o != node) known |= uint32_t{1} << o;
  }
  std::vector<char> got(cfg.rho + 1, 0);
  for (size_t i = begin; i < end; ++i) {
    const TraceMsg& m = tr.messages[i];
    if (m.recipient != node || !valid(m)) continue;
    for (size_t k = 0; k < m.ids.size(); ++k) {
      int id = m.ids[k];
      if (got[id]) continue;
      PayloadMeta meta;
      meta.event_id = id;
      meta.parity = m.parities[k];
      meta.genuine = m.genuine[k] != 0;
      if (!retrievable(meta, known, node)) continue;
      bool echo = false;
      for (const Sent& s : sent[id]) {
        if (s.parity == meta.parity && s.genuine == meta.genuine &&
            s.round < m.round) {
          echo = true;
        }
      }
      if (!echo) got[id] = 1;
    }
  }
  std::vector<int> out;
  for (int id = 1; id <= cfg.rho; ++id) {
    if (got[id]) out.push_back(id);
  }
  return out;
}

}  // namespace medsim
