#pragma once

#include <string>
#include <vector>

#include "medsim/rational.hpp"
#include "medsim/sim.hpp"
#include "medsim/utility.hpp"

namespace medsim {

// Exact probability that a fixed player receives a fixed event within the
// live age window, everyone conformant, under the per-(node, event) uniform
// subset choices.  Exact rational arithmetic; supported for n <= 8 (the state
// space and denominators grow combinatorially past that; use reliability_mc
// for larger systems).
Rat reliability_exact(int n, unsigned f, int delta_age);

struct McReliability {
  double mean = 0;
  double halfwidth = 0;  // 99%, clustered by stage
  long long receptions = 0;
  long long opportunities = 0;
};

// Empirical reception frequency over conformant stages of a simulated run.
McReliability reliability_mc(const SimConfig& cfg, int stages, uint64_t master);

// Chance that at least one of k scrubbed sequences is audited in one stage.
double punish_probability(int k, double p);

struct DeltaEstimate {
  std::string kind;
  double point = 0;      // mean one-shot gain of conforming vs deviating
  double halfwidth = 0;  // 99% paired interval
  int replicates = 0;
  double delta_disc = 0;
  bool tail_equal = true;  // stage t+2 utilities matched exactly in every pair
};

// Paired-replicate estimate of the conform-minus-deviate utility difference
// over the deviation stage and the next one (later stages cancel exactly;
// tail_equal records the empirical check of that).
DeltaEstimate one_deviation_delta(const SimConfig& cfg, const DeviationPlan& plan,
                                  int reps, uint64_t master,
                                  const std::vector<DeviationPlan>& script = {});

// Standard one-shot deviation of the given kind: node 1 at stage 2, placed
// mid-dissemination for forwarding kinds and in the monitoring rounds for
// report-side kinds.  The second element is the environment script the
// deviation needs to be observable (only withhold-accusation has one: a
// scripted invalid message from the future accusee, aimed only at node 1 a
// stage earlier, present in both arms of a paired run).
std::pair<DeviationPlan, std::vector<DeviationPlan>> canonical_deviation(
    const SimConfig& cfg, DevKind kind);

struct SweepRow {
  std::string kind;
  double delta_mean = 0;
  double ci_halfwidth = 0;
  int replicates = 0;
  bool pass = false;
};

// The standard battery of one-shot deviations, each estimated with paired
// replicates; pass means the 99% lower bound clears -tolerance, with the
// tolerance floored at 1e-6 * beta.
std::vector<SweepRow> equilibrium_sweep(const SimConfig& cfg, int reps,
                                        uint64_t master);

struct GapReport {
  int rho = 0;
  double avg_u = 0;        // empirical per-stage utility, player average
  double ubar = 0;         // q(f) * (beta - gamma * f)
  double gap = 0;          // |avg_u - ubar|
  double mon_bits_mean = 0;   // per player per stage
  double mon_bits_bound = 0;  // n * 4 m ceil(log2 rho) * (1 + p S)
  bool within_bound = false;
};

// Distance between the simulated long-run average utility and the idealized
// dissemination-only stage value, plus the monitoring-overhead accounting.
GapReport overhead_gap(const SimConfig& cfg, int stages, uint64_t master);

struct PlantResult {
  int k = 0;
  double p_mon = 0;
  int stages = 0;
  int verdicts = 0;
  double freq = 0;       // verdicts per plantable stage
  double predicted = 0;  // 1 - (1-p)^k
};

// Runs a node that persistently refuses to forward sequences 1..k and counts
// how often the audit catches it.
PlantResult planted_drop_run(const SimConfig& cfg, int node, int k, int stages,
                             uint64_t master);

struct FalsifyCompare {
  double freq_honest = 0;
  double freq_falsified = 0;
  double zstat = 0;
  bool indistinguishable = false;  // |z| below the 99% two-sided bound
};

// Same planted node twice: once reporting honestly, once answering every
// audit with fabricated records that would convict it if the mediator ever
// read an observer's own submissions against the observer.
FalsifyCompare report_shield_test(const SimConfig& cfg, int stages,
                                  uint64_t master);

// CSV renderers used by the command line and the golden-output tests.
std::string sweep_csv(const SimConfig& cfg, const std::vector<SweepRow>& rows);
std::string gap_csv(const std::vector<GapReport>& rows);

}  // namespace medsim
