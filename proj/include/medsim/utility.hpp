#pragma once

#include <vector>

#include "medsim/rational.hpp"
#include "medsim/sim.hpp"

namespace medsim {

// Exact per-stage utility of a player: (beta * events retrieved - alpha *
// total bits sent) / rho, from the trace aggregates.
Rat stage_utility(const Trace& tr, int stage, int node);

// Discounted sum over the simulated horizon plus a closed-form tail:
// sum_{t=0}^{T-1} delta^t u_t + delta^T * tail / (1 - delta).
// Requires 0 < delta < 1.
double discounted(const std::vector<Rat>& utilities, double delta, double tail);

struct UtilityReport {
  std::vector<Rat> stage_u;       // per stage
  std::vector<int> benefit;       // events retrieved per stage
  std::vector<long long> bits;    // bits sent per stage
  double discounted_u = 0;        // tail taken as the final stage's utility
  double average_u = 0;           // plain mean of stage utilities
};

UtilityReport utility_report(const Trace& tr, int node);

// Recomputes, from a full message log alone, which event ids a node retrieved
// in a stage: valid deliveries whose payload is genuine, carries no key layer
// the reader lacks and not the reader's own, and is not an echo of bits the
// node itself sent earlier.  Serves as an independent cross-check of the
// engine's online accounting.
std::vector<int> rec_set_from_messages(const Trace& tr, int stage, int node);

}  // namespace medsim
