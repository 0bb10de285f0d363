#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "medsim/rational.hpp"

namespace medsim {

// Static parameters of one simulation.  Node 0 is both the event source and
// the mediator; nodes 1..n-1 are the players.  A stage is r_mon monitoring
// rounds followed by r_dis dissemination rounds; rho events are introduced per
// stage, grouped into n_seq sequences of per_seq consecutive ids each.
struct SimConfig {
  int n = 6;            // nodes, including node 0
  unsigned f = 2;       // forward fanout
  int rho = 64;         // events per stage (n_seq * per_seq)
  int delta_age = 4;    // age window: a tuple is live at ages 1..delta_age
  int per_seq = 8;      // ids per sequence (m)
  int n_seq = 8;        // sequences per stage (S)
  double p_mon = 0.125; // per-(subject, sequence) monitoring probability
  int payload_bits = 32;            // payload content size c, at most 64
  Rat alpha = Rat(1);   // cost per bit sent
  Rat beta = Rat(760);  // value per retrieved event; defaults to 10 * f * gamma
  double delta_disc = 0.95;         // discount factor
  int r_mon = 18;       // monitoring rounds per stage (2*n_seq + 2)
  int r_dis = 68;       // dissemination rounds per stage (>= rho + delta_age)
  uint64_t master_seed = 12345;

  int rounds_per_stage() const { return r_mon + r_dis; }
  int log2_nodes() const;  // ceil(log2 n)
  int log2_events() const; // ceil(log2 rho)
  // Per-bit-cost-normalized value of one forward: alpha * (c + ceil(log2 rho)).
  Rat gamma() const;
  // Monitoring-response budget per (subject, sequence): 4 * m * ceil(log2 rho) bits.
  int report_block_bits() const { return 4 * per_seq * log2_events(); }
  // Bits of one accusation-or-padding slot (and of one verdict).
  int slot_bits() const { return log2_nodes() + 1; }
};

// Sequence number of an event id, 1-based: ids (s-1)*m+1 .. s*m form sequence s.
int seq_of(const SimConfig& cfg, int id);

// Age of id at stage-local round r: the source sends id at age 1 in round
// r_mon + id.  Values outside 1..delta_age mean the tuple is not live.
int age_of(const SimConfig& cfg, int id, int round);

struct ConfigCheck {
  std::vector<std::string> errors;    // structural violations; refuse to run
  std::vector<std::string> warnings;  // soundness proxies out of range; run anyway
};

// Structural checks are hard errors (sizes, windows, partition arithmetic).
// The soundness proxies trace the asymptotic conditions behind the
// equilibrium guarantee and warn when a config leaves the regime:
//   C1  m * ceil(log2 rho) / rho        <= 1
//   C2  p_mon * ceil(log2 rho)          <= 1
//   C3  p_mon * rho                     >= m
//   C4  0.1 <= (1 - p_mon)^S           <= 0.9
ConfigCheck validate_config(const SimConfig& cfg);

// Defaults at a given event count: m = S = ceil(sqrt(rho)) with rho padded up
// to the next perfect square (padded ids carry zero-value events),
// p_mon = 1/sqrt(rho), r_mon = 2S+2, r_dis = rho + delta_age.
SimConfig default_config(int rho);

// Recognized load_config keys, in documentation order.
const std::vector<std::string>& config_keys();

// Builds a config from key=value pairs.  A "rho" key is applied first through
// default_config, so dependent fields (m, S, p_mon, round counts, beta) track
// it unless the same pair list also sets them explicitly.  Unknown keys and
// unparsable values throw std::invalid_argument naming the valid keys.
SimConfig load_config(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace medsim
