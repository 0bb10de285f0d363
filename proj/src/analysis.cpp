#include "medsim/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <tuple>

#include "medsim/rng.hpp"
#include "medsim/stats.hpp"
#include "medsim/subset.hpp"

namespace medsim {

namespace {

Rat rat_binomial(unsigned n, unsigned k) {
  return Rat(static_cast<long long>(binomial(n, k)));
}

Rat rat_pow(Rat base, int e) {
  Rat acc(1);
  for (int i = 0; i < e; ++i) acc *= base;
  return acc;
}

// Spread state with the tracked player still uninfected: wave = nodes that
// got the event in the previous round and forward now, total = everyone
// holding it (source included).  Exchangeability over the uninfected players
// makes (age, total, wave) a sufficient description.
class SpreadExact {
 public:
  SpreadExact(int n, unsigned f, int delta) : n_(n), f_(f), delta_(delta) {}

  Rat solve() { return hit_prob(1, 1, 1); }

 private:
  Rat hit_prob(int age, int total, int wave) {
    if (wave == 0 || age > delta_) return Rat(0);
    auto key = std::make_tuple(age, total, wave);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    int u = n_ - total;  // uninfected players, tracked one among them
    Rat x = rat_binomial(n_ - 1, f_);
    // covered(b): chance one forwarder's picks stay inside the infected
    // others plus a fixed b-subset of the uninfected
    std::vector<Rat> covered(u + 1);
    for (int b = 0; b <= u; ++b) {
      covered[b] = rat_binomial(total - 1 + b, f_) / x;
    }
    Rat acc(0);
    for (int v = 0; v <= u; ++v) {
      // chance the wave's union hits exactly a fixed v-subset
      Rat exact(0);
      for (int b = 0; b <= v; ++b) {
        Rat term = rat_binomial(v, b) * rat_pow(covered[b], wave);
        exact = ((v - b) % 2 == 0) ? exact + term : exact - term;
      }
      if (v >= 1) acc += rat_binomial(u - 1, v - 1) * exact;  // tracked player hit
      Rat miss_weight = rat_binomial(u - 1, v) * exact;
      if (miss_weight != Rat(0)) {
        acc += miss_weight * hit_prob(age + 1, total + v, v);
      }
    }
    memo_.emplace(key, acc);
    return acc;
  }

  int n_;
  unsigned f_;
  int delta_;
  std::map<std::tuple<int, int, int>, Rat> memo_;
};

}  // namespace

Rat reliability_exact(int n, unsigned f, int delta_age) {
  if (n < 2 || delta_age < 1) throw std::invalid_argument("bad spread parameters");
  if (f < 1 || static_cast<int>(f) > n - 1) {
    throw std::invalid_argument("fanout must lie in 1..n-1");
  }
  if (n > 8) {
    throw std::invalid_argument(
        "exact spread probability is supported for n <= 8; use reliability_mc "
        "for larger systems");
  }
  return SpreadExact(n, f, delta_age).solve();
}

McReliability reliability_mc(const SimConfig& cfg, int stages, uint64_t master) {
  SimConfig c = cfg;
  c.master_seed = master;
  RunOptions opt;
  opt.stages = stages;
  Trace tr = run(c, opt);
  McReliability out;
  std::vector<double> per_stage;
  long long denom_stage = static_cast<long long>(cfg.rho) * (cfg.n - 1);
  for (const StageStats& st : tr.per_stage) {
    long long got = 0;
    for (int i = 1; i < cfg.n; ++i) got += st.received[i];
    out.receptions += got;
    per_stage.push_back(static_cast<double>(got) / denom_stage);
  }
  out.opportunities = denom_stage * stages;
  MeanCI ci = mean_ci(per_stage, z99());
  out.mean = ci.mean;
  out.halfwidth = ci.halfwidth;
  return out;
}

double punish_probability(int k, double p) {
  if (k < 0 || p < 0.0 || p > 1.0) throw std::invalid_argument("bad audit arguments");
  return 1.0 - std::pow(1.0 - p, k);
}

DeltaEstimate one_deviation_delta(const SimConfig& cfg, const DeviationPlan& plan,
                                  int reps, uint64_t master,
                                  const std::vector<DeviationPlan>& script) {
  DeltaEstimate out;
  out.kind = dev_name(plan.kind);
  out.replicates = reps;
  out.delta_disc = cfg.delta_disc;
  int t = plan.stage;
  int stages = t + 2;
  std::vector<double> ds;
  ds.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    SimConfig c = cfg;
    c.master_seed = Substream(master, Stream::Test, 0, static_cast<uint64_t>(rep)).next();
    auto [conform, deviate] = paired_run(c, stages, plan, script);
    Rat now = stage_utility(conform, t, plan.node) - stage_utility(deviate, t, plan.node);
    Rat next =
        stage_utility(conform, t + 1, plan.node) - stage_utility(deviate, t + 1, plan.node);
    ds.push_back(now.to_double() + cfg.delta_disc * next.to_double());
    if (stage_utility(conform, t + 2, plan.node) !=
        stage_utility(deviate, t + 2, plan.node)) {
      out.tail_equal = false;
    }
  }
  MeanCI ci = mean_ci(ds, t99(reps > 1 ? reps - 1 : 1));
  out.point = ci.mean;
  out.halfwidth = ci.halfwidth;
  return out;
}

std::pair<DeviationPlan, std::vector<DeviationPlan>> canonical_deviation(
    const SimConfig& cfg, DevKind kind) {
  DeviationPlan p;
  p.kind = kind;
  p.node = 1;
  p.stage = 2;
  std::vector<DeviationPlan> script;
  switch (kind) {
    case DevKind::DropForwardAll:
    case DevKind::DropForwardId:
    case DevKind::WrongSubset:
    case DevKind::PrematureSend:
      p.round = cfg.r_mon + std::min(12, cfg.r_dis);
      break;
    case DevKind::InvalidMessage:
      p.round = cfg.r_mon + std::min(12, cfg.r_dis);
      p.target = 2;
      break;
    case DevKind::WithholdReport:
    case DevKind::FalsifyReport:
      p.target = 2;
      p.seqno = 1;
      break;
    case DevKind::WithholdAccusation: {
      p.target = 2;
      // Withholding an accusation needs something to accuse: a scripted
      // invalid message from the future accusee, aimed only at the measured
      // node, one stage earlier and present in both arms.
      DeviationPlan provoke;
      provoke.kind = DevKind::InvalidMessage;
      provoke.node = 2;
      provoke.stage = 1;
      provoke.round = cfg.r_mon + std::min(5, cfg.r_dis);
      provoke.target = 1;
      script.push_back(provoke);
      break;
    }
  }
  return {p, script};
}

std::vector<SweepRow> equilibrium_sweep(const SimConfig& cfg, int reps,
                                        uint64_t master) {
  std::vector<std::pair<DeviationPlan, std::vector<DeviationPlan>>> cases;
  for (DevKind kind :
       {DevKind::DropForwardAll, DevKind::WrongSubset, DevKind::PrematureSend,
        DevKind::InvalidMessage, DevKind::WithholdReport,
        DevKind::WithholdAccusation}) {
    cases.push_back(canonical_deviation(cfg, kind));
  }

  double tol = 1e-6 * cfg.beta.to_double();
  std::vector<SweepRow> rows;
  for (auto& [plan, script] : cases) {
    DeltaEstimate est = one_deviation_delta(cfg, plan, reps, master, script);
    SweepRow row;
    row.kind = est.kind;
    row.delta_mean = est.point;
    row.ci_halfwidth = est.halfwidth;
    row.replicates = est.replicates;
    row.pass = est.point - est.halfwidth >= -tol;
    rows.push_back(row);
  }
  return rows;
}

GapReport overhead_gap(const SimConfig& cfg, int stages, uint64_t master) {
  SimConfig c = cfg;
  c.master_seed = master;
  RunOptions opt;
  opt.stages = stages;
  Trace tr = run(c, opt);
  GapReport out;
  out.rho = cfg.rho;
  long long mon_total = 0;
  double disc_sum = 0;
  for (int i = 1; i < cfg.n; ++i) {
    disc_sum += utility_report(tr, i).discounted_u;
  }
  for (int s = 1; s <= stages; ++s) {
    for (int i = 1; i < cfg.n; ++i) {
      mon_total += tr.per_stage[s - 1].bits_mon[i];
    }
  }
  long long cells = static_cast<long long>(stages) * (cfg.n - 1);
  // (1 - delta) times the discounted total is the per-stage utility rate
  out.avg_u = (1.0 - cfg.delta_disc) * disc_sum / (cfg.n - 1);
  Rat q = reliability_exact(cfg.n, cfg.f, cfg.delta_age);
  Rat ubar = q * (cfg.beta - cfg.gamma() * Rat(static_cast<long long>(cfg.f)));
  out.ubar = ubar.to_double();
  out.gap = std::fabs(out.avg_u - out.ubar);
  out.mon_bits_mean = static_cast<double>(mon_total) / cells;
  out.mon_bits_bound = static_cast<double>(cfg.n) * cfg.report_block_bits() *
                       (1.0 + cfg.p_mon * cfg.n_seq);
  out.within_bound = out.mon_bits_mean <= out.mon_bits_bound;
  return out;
}

PlantResult planted_drop_run(const SimConfig& cfg, int node, int k, int stages,
                             uint64_t master) {
  SimConfig c = cfg;
  c.master_seed = master;
  RunOptions opt;
  opt.stages = stages;
  if (k > 0) {
    opt.persistent.node = node;
    opt.persistent.drop_seqs = k;
  }
  Trace tr = run(c, opt);
  PlantResult out;
  out.k = k;
  out.p_mon = cfg.p_mon;
  out.stages = stages;
  for (const StageStats& st : tr.per_stage) {
    for (int v : st.verdicts) {
      if (v == node) out.verdicts++;
    }
  }
  out.freq = stages > 1 ? static_cast<double>(out.verdicts) / (stages - 1) : 0.0;
  out.predicted = punish_probability(k, cfg.p_mon);
  return out;
}

FalsifyCompare report_shield_test(const SimConfig& cfg, int stages,
                                  uint64_t master) {
  auto run_arm = [&](bool falsify, uint64_t seed) {
    SimConfig c = cfg;
    c.master_seed = seed;
    RunOptions opt;
    opt.stages = stages;
    opt.persistent.node = 1;
    opt.persistent.drop_seqs = 1;
    opt.persistent.falsify_reports = falsify;
    Trace tr = run(c, opt);
    long long verdicts = 0;
    for (const StageStats& st : tr.per_stage) {
      for (int v : st.verdicts) {
        if (v == 1) verdicts++;
      }
    }
    return verdicts;
  };
  uint64_t seed_a = Substream(master, Stream::Test, 1, 0).next();
  uint64_t seed_b = Substream(master, Stream::Test, 2, 0).next();
  long long va = run_arm(false, seed_a);
  long long vb = run_arm(true, seed_b);
  FalsifyCompare out;
  out.freq_honest = static_cast<double>(va) / (stages - 1);
  out.freq_falsified = static_cast<double>(vb) / (stages - 1);
  out.zstat = two_proportion_z(va, stages - 1, vb, stages - 1);
  out.indistinguishable = std::fabs(out.zstat) <= z99();
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const SimConfig& cfg, const std::vector<SweepRow>& rows) {
  std::string out =
      "n,f,rho,p_mon,delta_disc,deviation,delta_mean,ci99_halfwidth,replicates,"
      "pass\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(cfg.n) + "," + std::to_string(cfg.f) + "," +
           std::to_string(cfg.rho) + "," + fmt(cfg.p_mon) + "," +
           fmt(cfg.delta_disc) + "," + r.kind + "," + fmt(r.delta_mean) + "," +
           fmt(r.ci_halfwidth) + "," + std::to_string(r.replicates) + "," +
           (r.pass ? "yes" : "no") + "\n";
  }
  return out;
}

std::string gap_csv(const std::vector<GapReport>& rows) {
  std::string out =
      "rho,avg_u,ubar,gap,mon_bits_mean,mon_bits_bound,within_bound\n";
  for (const GapReport& r : rows) {
    out += std::to_string(r.rho) + "," + fmt(r.avg_u) + "," + fmt(r.ubar) +
           "," + fmt(r.gap) + "," + fmt(r.mon_bits_mean) + "," +
           fmt(r.mon_bits_bound) + "," + (r.within_bound ? "yes" : "no") + "\n";
  }
  return out;
}

}  // namespace medsim
