#pragma once

#include <string>
#include <utility>
#include <vector>

#include "medsim/cipher.hpp"
#include "medsim/config.hpp"

namespace medsim {

enum class MsgKind {
  Dissemination,   // bundle of (id, payload) tuples, one message per recipient
  Accusation,      // round-1 slot naming a target
  Padding,         // round-1 empty slot, or report-block filler
  MonitorRequest,  // mediator asks for records about (subject, sequence)
  Report,          // one direction of a monitoring response
  Verdict,         // mediator announces a punished node
  KeyDelivery,     // stage key of `owner`, sent to everyone else
  SeedDelivery,    // node's own fresh subset seed
};

const char* kind_name(MsgKind k);

struct Tuple {
  int id = 0;
  Payload payload;
};

enum class ReportDir { Received, Sent };

// One wire message.  Only the fields of the active kind are meaningful.
struct Message {
  MsgKind kind = MsgKind::Padding;
  int sender = 0;
  int recipient = 0;

  std::vector<Tuple> tuples;  // Dissemination

  int target = -1;            // Accusation, Verdict
  int subject = -1;           // MonitorRequest, Report, report-block Padding
  int seqno = 0;              // MonitorRequest
  ReportDir dir = ReportDir::Received;             // Report
  std::vector<std::pair<int, int>> entries;        // Report: (id, round)
  int pad_bits = 0;           // Padding
  int key_owner = -1;         // KeyDelivery
};

// Wire size in bits.  Event ids and round fields are ceil(log2 rho) bits,
// node ids ceil(log2 n); an accusation/verdict slot carries one extra flag
// bit; keys are 128 bits and seeds 64.
long long message_bits(const Message& m, const SimConfig& cfg);

}  // namespace medsim
