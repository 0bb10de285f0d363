#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "medsim/cipher.hpp"
#include "medsim/config.hpp"
#include "medsim/message.hpp"

namespace medsim {

// First-occurrence record table: [peer][id] -> stage-local round of the first
// send/reception involving that peer and id, 0 when none.
using RecordTable = std::vector<std::vector<int>>;

RecordTable make_table(const SimConfig& cfg);
void clear_table(RecordTable& t);

// Phase of a stage-local round.
enum class RoundKind { Slots, Request, Response, Judgment, Dissem };
RoundKind round_kind(const SimConfig& cfg, int round);

// The consistency predicate over one event id, evaluated against a subject's
// sent records (peers it forwarded to, with rounds), received records, and
// the subset its issued seed prescribes.  Checked in this order:
//   (a) a forward went to a peer outside the prescribed subset;
//   (b) the subject first received the id at an age with a forwarding
//       obligation (1..delta_age-1) and some prescribed peer has no forward
//       at exactly the next round;
//   (c) the subject forwarded an id it never received.
// Anything else is consistent; in particular a first reception at age
// delta_age carries no obligation, and never touching the id is consistent.
bool inconsistent(const SimConfig& cfg, int id, const RecordTable& sent,
                  const RecordTable& received, const std::vector<int>& expected);

// Per-node protocol state.  Node 0 holds one of these too (it records its own
// sends and receptions like anyone else) plus the mediator extras below.
struct NodeState {
  int self = 0;

  // Working records for the current stage, archived at the stage boundary so
  // monitoring in stage t can describe stage t-1.
  std::vector<int8_t> stat, stat_prev;  // per node; 0 = Good, 1 = Bad
  RecordTable re, se, re_prev, se_prev;
  std::vector<char> miss;  // per sequence, 1 = scrubbed

  struct PendEntry {
    bool present = false;
    Payload payload;
    int recv_round = 0;
  };
  std::vector<PendEntry> pend;     // per id, awaiting forward
  std::vector<char> first_seen;    // per id: received at least once this stage
  std::vector<char> rec;           // per id: value retrieved this stage
  std::vector<std::vector<std::pair<uint64_t, int>>> sent_bits;  // per id: (bits, round)

  uint64_t seed = 0;               // own subset seed, this stage
  std::vector<Key> keys;           // per owner; own slot empty
  uint32_t known_mask = 0;         // owners whose stage key this node holds
  uint32_t punished = 0;           // nodes under verdict this stage
  bool self_bad = false;           // emitted an invalid action; silent until next stage

  std::vector<std::vector<int>> subset_cache;    // per id, filled lazily from seed
  std::vector<std::pair<int, int>> requests;     // (subject, seq) to answer next round

  long long bits_dis = 0, bits_mon = 0;  // stage cost accumulators
  int benefit = 0;                       // events retrieved this stage
  int received_in_window = 0;            // first receptions this stage

  void init(const SimConfig& cfg, int self_id);
  // Round-1 boundary: archive stat/re/se for the monitoring phase, then reset
  // all working state for the new stage.
  void archive_and_reset(const SimConfig& cfg);
  const std::vector<int>& subset_for(const SimConfig& cfg, int id);
};

// Mediator bookkeeping on top of node 0's own records.
struct MediatorState {
  std::vector<std::pair<int, int>> accusations;  // (accuser, target), this stage
  std::vector<std::pair<int, int>> granted;      // (subject, seq), this stage
  // Claims about each subject assembled from other nodes' reports:
  // claim_sent[j][l][id] = round at which l says j forwarded id to l,
  // claim_recv[j][l][id] = round at which l says it sent id to j.
  std::vector<RecordTable> claim_sent, claim_recv;
  // Granted audits for which some observer's response block was missing or
  // invalid. The verdict check abstains from these: absent testimony belongs
  // to the silent observer (already marked Bad), not to the audited subject,
  // and judging a subject on incomplete claims would convict bystanders.
  std::vector<std::pair<int, int>> incomplete;
  std::vector<uint64_t> issued_seed, issued_seed_prev;  // per node
  std::vector<Key> issued_key, issued_key_prev;         // per owner (players)

  void init(const SimConfig& cfg);
  void archive_and_reset(const SimConfig& cfg);
};

// Shape validity of a dissemination message at a given stage-local round, as
// any recipient can check it: right phase, at least one tuple, ids distinct
// and in range, every age inside the live window.
bool dissemination_valid(const SimConfig& cfg, const Message& m, int round);

// Round-1 bundle from one player: exactly n-1 slot-sized messages, every
// accusation naming a distinct target other than the sender.
bool slot_bundle_valid(const SimConfig& cfg, int sender,
                       const std::vector<const Message*>& bundle);

// Monitoring response from one observer about one granted (subject, seq):
// at most one report per direction, entries inside the sequence with distinct
// ids and rounds inside the dissemination phase, padding bringing the total
// to exactly the fixed block size.
bool response_block_valid(const SimConfig& cfg, int subject, int seqno,
                          const std::vector<const Message*>& block);

}  // namespace medsim
