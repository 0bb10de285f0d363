#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "medsim/config.hpp"
#include "medsim/message.hpp"
#include "medsim/protocol.hpp"

namespace medsim {

// One-shot deviation kinds.  Each plan perturbs exactly one action of one
// node in one round; the node plays the prescribed strategy before and after.
enum class DevKind {
  DropForwardAll,      // send none of the forwards due this round
  DropForwardId,       // send all forwards due except one id's
  WrongSubset,         // forward one id to a perturbed recipient set
  PrematureSend,       // inject a fabricated tuple for an id not yet received
  InvalidMessage,      // emit a shape-invalid action (bad bundle or duplicate id)
  WithholdAccusation,  // pad the slot that should accuse a target
  WithholdReport,      // answer one granted request with pure padding
  FalsifyReport,       // answer one granted request with fabricated entries
};

const char* dev_name(DevKind k);

struct DeviationPlan {
  DevKind kind = DevKind::DropForwardAll;
  int node = 1;
  int stage = 2;
  // Stage-local round; 0 picks the kind's natural round (1 for accusation
  // deviations, the round covering `seqno` for report deviations).
  int round = 0;
  // Event id for the forward deviations; 0 targets the first eligible id.
  int id = 0;
  std::vector<int> replacement;  // WrongSubset recipients; empty swaps one member
  int target = -1;               // accusation target or report subject
  int seqno = 1;                 // sequence of the report deviations
  bool self_incriminate = true;  // FalsifyReport: fabricate vs erase
};

// Standing behavior override used by the analysis experiments: a node that
// persistently refuses to forward low sequences, or persistently answers
// monitoring requests with fabricated records, every stage.
struct PersistentBehavior {
  int node = -1;
  int drop_seqs = 0;
  bool falsify_reports = false;
};

struct TraceMsg {
  int stage = 0, round = 0, sender = 0, recipient = 0;
  MsgKind kind = MsgKind::Padding;
  long long bits = 0;
  std::vector<int> ids;            // tuple ids (dissemination)
  std::vector<uint32_t> parities;  // matching key parities
  std::vector<uint8_t> genuine;    // matching genuineness flags
};

struct StageStats {
  std::vector<long long> bits_dis, bits_mon;  // per node
  std::vector<int> benefit;                   // per node: events retrieved
  std::vector<int> received;                  // per node: first receptions
  std::vector<int> verdicts;                  // punished nodes this stage
  std::vector<std::pair<int, int>> granted;   // (subject, seq) audited
};

struct Trace {
  SimConfig cfg;
  int stages = 0;
  bool full = false;
  std::vector<StageStats> per_stage;
  std::vector<TraceMsg> messages;        // full traces only
  std::vector<size_t> stage_msg_begin;   // index into messages, per stage
  std::vector<uint64_t> state_digest;    // per stage, full traces only
  std::vector<std::string> violations;   // invariant findings when checking is on
};

struct RunOptions {
  int stages = 1;
  bool full_trace = false;
  bool check_invariants = false;
  const DeviationPlan* plan = nullptr;      // the measured one-shot deviation
  std::vector<DeviationPlan> script;        // environment events, both arms
  PersistentBehavior persistent;
};

Trace run(const SimConfig& cfg, const RunOptions& opt);

// Common-random-number pair: same seed and environment, with and without the
// measured deviation.
std::pair<Trace, Trace> paired_run(const SimConfig& cfg, int stages,
                                   const DeviationPlan& plan,
                                   const std::vector<DeviationPlan>& script = {});

// Stable line-oriented export; identical traces serialize to identical bytes.
void export_trace(const Trace& tr, std::ostream& os);
std::string trace_to_string(const Trace& tr);

}  // namespace medsim
