#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "medsim/analysis.hpp"
#include "medsim/config.hpp"
#include "medsim/sim.hpp"
#include "medsim/utility.hpp"

using namespace medsim;

namespace {

using KvPairs = std::vector<std::pair<std::string, std::string>>;

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  uint64_t seed = 0;
  bool seed_given = false;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::pair<std::string, std::string> split_kv(const std::string& raw,
                                             const std::string& origin) {
  size_t eq = raw.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument(origin + ": expected key=value, got '" + raw + "'");
  }
  std::string key = trim(raw.substr(0, eq));
  std::string val = trim(raw.substr(eq + 1));
  if (key.empty()) {
    throw std::invalid_argument(origin + ": empty key in '" + raw + "'");
  }
  return {key, val};
}

KvPairs collect_pairs(const CommonOpts& c) {
  KvPairs pairs;
  if (!c.config_file.empty()) {
    std::ifstream in(c.config_file);
    if (!in) {
      throw std::invalid_argument("cannot open config file '" + c.config_file + "'");
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      pairs.push_back(split_kv(line, c.config_file + ":" + std::to_string(lineno)));
    }
  }
  for (const std::string& s : c.sets) {
    pairs.push_back(split_kv(s, "--set"));
  }
  return pairs;
}

void apply_seed(SimConfig& cfg, const CommonOpts& c) {
  if (c.seed_given) {
    cfg.master_seed = c.seed;
    return;
  }
  if (const char* env = std::getenv("MEDSIM_SEED")) {
    std::string val(env);
    size_t used = 0;
    uint64_t v = 0;
    try {
      v = std::stoull(val, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("MEDSIM_SEED: cannot parse '" + val + "'");
    }
    if (used != val.size()) {
      throw std::invalid_argument("MEDSIM_SEED: cannot parse '" + val + "'");
    }
    cfg.master_seed = v;
  }
}

SimConfig finalize_config(const CommonOpts& c) {
  SimConfig cfg = load_config(collect_pairs(c));
  apply_seed(cfg, c);
  ConfigCheck chk = validate_config(cfg);
  if (!chk.errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& e : chk.errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  for (const std::string& w : chk.warnings) std::cerr << "warning: " << w << "\n";
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_file,
                  "flat key=value config file ('#' starts a comment)");
  cmd->add_option("--set", c.sets, "override one config key")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", c.seed,
                  "master seed (overrides MEDSIM_SEED and the config file)")
      ->each([&c](const std::string&) { c.seed_given = true; });
}

void write_out(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

DevKind kind_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(DevKind::FalsifyReport); ++i) {
    DevKind k = static_cast<DevKind>(i);
    if (name == dev_name(k)) return k;
  }
  std::string valid;
  for (int i = 0; i <= static_cast<int>(DevKind::FalsifyReport); ++i) {
    if (!valid.empty()) valid += ", ";
    valid += dev_name(static_cast<DevKind>(i));
  }
  throw std::invalid_argument("unknown deviation kind '" + name +
                              "'; valid kinds: " + valid);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic round-based simulator for mediated epidemic "
               "dissemination, with equilibrium and reliability analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "medsim 1.0.0");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run stages and print the trace");
  CommonOpts sim_c;
  add_common(sim_cmd, sim_c);
  int sim_stages = 1;
  bool sim_full = false;
  bool sim_check = false;
  std::string sim_out;
  sim_cmd->add_option("--stages", sim_stages, "stages to run")->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--full", sim_full, "record every message, not just stage summaries");
  sim_cmd->add_flag("--check", sim_check, "check cross-node invariants every round");
  sim_cmd->add_option("--out", sim_out, "output file ('-' or absent for stdout)");
  sim_cmd->callback([&] {
    SimConfig cfg = finalize_config(sim_c);
    RunOptions opt;
    opt.stages = sim_stages;
    opt.full_trace = sim_full;
    opt.check_invariants = sim_check;
    Trace tr = run(cfg, opt);
    write_out(sim_out, trace_to_string(tr));
  });

  // reliability
  auto* rel_cmd = app.add_subcommand(
      "reliability", "per-event reception probability under full conformance");
  CommonOpts rel_c;
  add_common(rel_cmd, rel_c);
  int rel_mc = 0;
  rel_cmd->add_option("--mc-stages", rel_mc,
                      "also estimate empirically over this many stages");
  rel_cmd->callback([&] {
    SimConfig cfg = finalize_config(rel_c);
    std::string out;
    if (cfg.n <= 8) {
      Rat q = reliability_exact(cfg.n, cfg.f, cfg.delta_age);
      out += "exact " + q.str() + " (" + fmt(q.to_double()) + ")\n";
    } else if (rel_mc <= 0) {
      throw std::invalid_argument(
          "exact computation supports n <= 8; pass --mc-stages for larger n");
    }
    if (rel_mc > 0) {
      McReliability mc = reliability_mc(cfg, rel_mc, cfg.master_seed);
      out += "mc mean=" + fmt(mc.mean) + " ci99_halfwidth=" + fmt(mc.halfwidth) +
             " stages=" + std::to_string(rel_mc) +
             " receptions=" + std::to_string(mc.receptions) +
             " opportunities=" + std::to_string(mc.opportunities) + "\n";
    }
    write_out("-", out);
  });

  // check-equilibrium
  auto* eq_cmd = app.add_subcommand(
      "check-equilibrium", "paired-run estimate of one deviation's utility effect");
  CommonOpts eq_c;
  add_common(eq_cmd, eq_c);
  std::string eq_kind = "drop-forward-all";
  int eq_reps = 40;
  eq_cmd->add_option("--kind", eq_kind, "deviation kind (see docs)");
  eq_cmd->add_option("--reps", eq_reps, "paired replicates")->check(CLI::PositiveNumber);
  eq_cmd->callback([&] {
    SimConfig cfg = finalize_config(eq_c);
    DevKind kind = kind_from_name(eq_kind);
    auto [plan, script] = canonical_deviation(cfg, kind);
    DeltaEstimate est = one_deviation_delta(cfg, plan, eq_reps, cfg.master_seed, script);
    double tol = 1e-6 * cfg.beta.to_double();
    bool pass = est.point - est.halfwidth >= -tol;
    std::string out = "kind=" + est.kind + " delta_mean=" + fmt(est.point) +
                      " ci99_halfwidth=" + fmt(est.halfwidth) +
                      " replicates=" + std::to_string(est.replicates) +
                      " delta_disc=" + fmt(est.delta_disc) +
                      " tail_equal=" + (est.tail_equal ? "yes" : "no") +
                      " pass=" + (pass ? "yes" : "no") + "\n";
    write_out("-", out);
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "estimate every standard deviation kind, CSV output");
  CommonOpts sweep_c;
  add_common(sweep_cmd, sweep_c);
  int sweep_reps = 40;
  std::string sweep_out;
  sweep_cmd->add_option("--reps", sweep_reps, "paired replicates per kind")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_out, "output file ('-' or absent for stdout)");
  sweep_cmd->callback([&] {
    SimConfig cfg = finalize_config(sweep_c);
    std::vector<SweepRow> rows = equilibrium_sweep(cfg, sweep_reps, cfg.master_seed);
    write_out(sweep_out, sweep_csv(cfg, rows));
  });

  // gap
  auto* gap_cmd = app.add_subcommand(
      "gap", "empirical average utility vs the closed-form prediction, CSV output");
  CommonOpts gap_c;
  add_common(gap_cmd, gap_c);
  std::vector<int> gap_rhos = {16, 64, 256};
  int gap_stages = 200;
  int gap_budget = 40;
  std::string gap_out;
  gap_cmd->add_option("--rho", gap_rhos, "event counts to sweep");
  gap_cmd->add_option("--stages", gap_stages, "stages per event count")
      ->check(CLI::PositiveNumber);
  gap_cmd->add_option("--budget", gap_budget,
                      "bits per event including the id; payload shrinks as rho "
                      "grows so per-event cost stays fixed");
  gap_cmd->add_option("--out", gap_out, "output file ('-' or absent for stdout)");
  gap_cmd->callback([&] {
    KvPairs base = collect_pairs(gap_c);
    bool user_payload = false;
    bool user_beta = false;
    KvPairs rest;
    for (const auto& kv : base) {
      if (kv.first == "rho") continue;  // swept below
      if (kv.first == "payload_bits") user_payload = true;
      if (kv.first == "beta") user_beta = true;
      rest.push_back(kv);
    }
    std::vector<GapReport> rows;
    for (int r : gap_rhos) {
      KvPairs pairs = {{"rho", std::to_string(r)}};
      pairs.insert(pairs.end(), rest.begin(), rest.end());
      SimConfig cfg = load_config(pairs);
      if (!user_payload) {
        cfg.payload_bits = std::max(1, gap_budget - cfg.log2_events());
        if (!user_beta) {
          cfg.beta = Rat(10) * Rat(static_cast<long long>(cfg.f)) * cfg.gamma();
        }
      }
      apply_seed(cfg, gap_c);
      ConfigCheck chk = validate_config(cfg);
      if (!chk.errors.empty()) {
        std::string msg = "invalid configuration at rho=" + std::to_string(r) + ":";
        for (const std::string& e : chk.errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
      }
      for (const std::string& w : chk.warnings) std::cerr << "warning: " << w << "\n";
      rows.push_back(overhead_gap(cfg, gap_stages, cfg.master_seed));
    }
    write_out(gap_out, gap_csv(rows));
  });

  // check-config
  auto* chk_cmd = app.add_subcommand(
      "check-config", "validate a configuration and report warnings");
  CommonOpts chk_c;
  add_common(chk_cmd, chk_c);
  chk_cmd->callback([&] {
    SimConfig cfg = finalize_config(chk_c);
    std::string out = "ok n=" + std::to_string(cfg.n) +
                      " f=" + std::to_string(cfg.f) +
                      " rho=" + std::to_string(cfg.rho) +
                      " per_seq=" + std::to_string(cfg.per_seq) +
                      " n_seq=" + std::to_string(cfg.n_seq) +
                      " delta_age=" + std::to_string(cfg.delta_age) +
                      " p_mon=" + fmt(cfg.p_mon) +
                      " payload_bits=" + std::to_string(cfg.payload_bits) +
                      " alpha=" + cfg.alpha.str() + " beta=" + cfg.beta.str() +
                      " delta_disc=" + fmt(cfg.delta_disc) +
                      " r_mon=" + std::to_string(cfg.r_mon) +
                      " r_dis=" + std::to_string(cfg.r_dis) +
                      " seed=" + std::to_string(cfg.master_seed) + "\n";
    write_out("-", out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
