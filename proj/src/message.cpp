#include "medsim/message.hpp"

namespace medsim {

const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Dissemination: return "disseminate";
    case MsgKind::Accusation: return "accuse";
    case MsgKind::Padding: return "padding";
    case MsgKind::MonitorRequest: return "monitor";
    case MsgKind::Report: return "report";
    case MsgKind::Verdict: return "verdict";
    case MsgKind::KeyDelivery: return "key";
    case MsgKind::SeedDelivery: return "seed";
  }
  return "?";
}

long long message_bits(const Message& m, const SimConfig& cfg) {
  switch (m.kind) {
    case MsgKind::Dissemination:
      return static_cast<long long>(m.tuples.size()) *
             (cfg.log2_events() + cfg.payload_bits);
    case MsgKind::Accusation:
      return cfg.slot_bits();
    case MsgKind::Padding:
      return m.pad_bits;
    case MsgKind::MonitorRequest:
      return cfg.log2_nodes();
    case MsgKind::Report:
      return static_cast<long long>(m.entries.size()) * 2 * cfg.log2_events();
    case MsgKind::Verdict:
      return cfg.slot_bits();
    case MsgKind::KeyDelivery:
      return cfg.log2_nodes() + 128;
    case MsgKind::SeedDelivery:
      return 64;
  }
  return 0;
}

}  // namespace medsim
