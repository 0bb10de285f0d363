#include "medsim/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace medsim {

namespace {

int ceil_log2(int v) {
  int b = 0;
  while ((1 << b) < v) ++b;
  return b;
}

}  // namespace

int SimConfig::log2_nodes() const { return ceil_log2(n); }
int SimConfig::log2_events() const { return ceil_log2(rho); }

Rat SimConfig::gamma() const { return alpha * Rat(payload_bits + log2_events()); }

int seq_of(const SimConfig& cfg, int id) { return (id - 1) / cfg.per_seq + 1; }

int age_of(const SimConfig& cfg, int id, int round) {
  return round + 1 - (id + cfg.r_mon);
}

ConfigCheck validate_config(const SimConfig& cfg) {
  ConfigCheck out;
  auto err = [&](const std::string& m) { out.errors.push_back(m); };
  auto warn = [&](const std::string& m) { out.warnings.push_back(m); };

  if (cfg.n < 3) err("n must be at least 3 (source plus two players)");
  if (cfg.f < 1 || static_cast<int>(cfg.f) > cfg.n - 2)
    err("f must satisfy 1 <= f <= n-2");
  if (cfg.rho < 1) err("rho must be positive");
  if (cfg.per_seq < 1 || cfg.n_seq < 1 || cfg.per_seq * cfg.n_seq != cfg.rho)
    err("per_seq * n_seq must equal rho");
  if (cfg.delta_age < 1) err("delta_age must be positive");
  if (cfg.r_mon != 2 * cfg.n_seq + 2)
    err("r_mon must equal 2*n_seq + 2");
  if (cfg.r_dis < cfg.rho + cfg.delta_age)
    err("r_dis must be at least rho + delta_age");
  if (cfg.payload_bits < 1 || cfg.payload_bits > 64)
    err("payload_bits must be between 1 and 64");
  if (!(cfg.p_mon > 0.0 && cfg.p_mon <= 1.0))
    err("p_mon must lie in (0, 1]");
  if (!(cfg.delta_disc >= 0.0 && cfg.delta_disc < 1.0))
    err("delta_disc must lie in [0, 1)");
  if (cfg.alpha < Rat(0)) err("alpha must be nonnegative");
  if (cfg.beta < Rat(0)) err("beta must be nonnegative");
  if (cfg.n > 32) err("n must be at most 32");
  if (!out.errors.empty()) return out;

  double lg = cfg.log2_events();
  double c1 = cfg.per_seq * lg / cfg.rho;
  if (c1 > 1.0)
    warn("C1: per-sequence monitoring footprint m*ceil(log2 rho)/rho = " +
         std::to_string(c1) + " exceeds 1");
  double c2 = cfg.p_mon * lg;
  if (c2 > 1.0)
    warn("C2: expected audit rate p_mon*ceil(log2 rho) = " + std::to_string(c2) +
         " exceeds 1");
  double c3 = cfg.p_mon * cfg.rho;
  if (c3 < cfg.per_seq)
    warn("C3: p_mon*rho = " + std::to_string(c3) +
         " is below per_seq; audits too sparse to cover a sequence");
  double c4 = std::pow(1.0 - cfg.p_mon, cfg.n_seq);
  if (c4 < 0.1 || c4 > 0.9)
    warn("C4: stage escape probability (1-p_mon)^n_seq = " + std::to_string(c4) +
         " outside [0.1, 0.9]");
  return out;
}

SimConfig default_config(int rho) {
  SimConfig cfg;
  int root = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(rho))));
  cfg.rho = root * root;  // padded up to a perfect square
  cfg.per_seq = root;
  cfg.n_seq = root;
  cfg.p_mon = 1.0 / root;
  cfg.delta_age = 4;
  cfg.r_mon = 2 * cfg.n_seq + 2;
  cfg.r_dis = cfg.rho + cfg.delta_age;
  cfg.alpha = Rat(1);
  cfg.beta = Rat(10) * Rat(static_cast<long long>(cfg.f)) * cfg.gamma();
  return cfg;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n",     "f",         "rho",        "delta_age",  "per_seq",
      "n_seq", "p_mon",     "payload_bits", "alpha",    "beta",
      "delta_disc", "r_mon", "r_dis",     "master_seed"};
  return keys;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& val) {
  throw std::invalid_argument("config key '" + key + "': cannot parse value '" +
                              val + "'");
}

long long parse_ll(const std::string& key, const std::string& val) {
  try {
    size_t used = 0;
    long long v = std::stoll(val, &used);
    if (used != val.size()) bad_value(key, val);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, val);
  } catch (const std::out_of_range&) {
    bad_value(key, val);
  }
}

uint64_t parse_u64(const std::string& key, const std::string& val) {
  try {
    size_t used = 0;
    if (!val.empty() && val[0] == '-') bad_value(key, val);
    uint64_t v = std::stoull(val, &used);
    if (used != val.size()) bad_value(key, val);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, val);
  } catch (const std::out_of_range&) {
    bad_value(key, val);
  }
}

double parse_dbl(const std::string& key, const std::string& val) {
  try {
    size_t used = 0;
    double v = std::stod(val, &used);
    if (used != val.size()) bad_value(key, val);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, val);
  } catch (const std::out_of_range&) {
    bad_value(key, val);
  }
}

Rat parse_rat_value(const std::string& key, const std::string& val) {
  try {
    return parse_rat(val);
  } catch (const std::invalid_argument&) {
    bad_value(key, val);
  }
}

}  // namespace

SimConfig load_config(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  bool has_rho = false;
  long long rho_val = 0;
  std::set<std::string> seen;
  for (const auto& [key, val] : pairs) {
    bool known = false;
    for (const std::string& k : config_keys()) {
      if (k == key) known = true;
    }
    if (!known) {
      std::string keys;
      for (const std::string& k : config_keys()) {
        if (!keys.empty()) keys += ", ";
        keys += k;
      }
      throw std::invalid_argument("unknown config key '" + key +
                                  "'; valid keys: " + keys);
    }
    seen.insert(key);
    if (key == "rho") {
      has_rho = true;
      rho_val = parse_ll(key, val);
    }
  }
  if (has_rho && rho_val < 1) bad_value("rho", std::to_string(rho_val));

  // A rho key seeds everything derived from the event count; later pairs
  // override individual fields.
  SimConfig cfg = has_rho ? default_config(static_cast<int>(rho_val)) : SimConfig{};
  for (const auto& [key, val] : pairs) {
    if (key == "rho") continue;
    if (key == "n") cfg.n = static_cast<int>(parse_ll(key, val));
    else if (key == "f") cfg.f = static_cast<unsigned>(parse_u64(key, val));
    else if (key == "delta_age") cfg.delta_age = static_cast<int>(parse_ll(key, val));
    else if (key == "per_seq") cfg.per_seq = static_cast<int>(parse_ll(key, val));
    else if (key == "n_seq") cfg.n_seq = static_cast<int>(parse_ll(key, val));
    else if (key == "p_mon") cfg.p_mon = parse_dbl(key, val);
    else if (key == "payload_bits") cfg.payload_bits = static_cast<int>(parse_ll(key, val));
    else if (key == "alpha") cfg.alpha = parse_rat_value(key, val);
    else if (key == "beta") cfg.beta = parse_rat_value(key, val);
    else if (key == "delta_disc") cfg.delta_disc = parse_dbl(key, val);
    else if (key == "r_mon") cfg.r_mon = static_cast<int>(parse_ll(key, val));
    else if (key == "r_dis") cfg.r_dis = static_cast<int>(parse_ll(key, val));
    else if (key == "master_seed") cfg.master_seed = parse_u64(key, val);
  }
  // Keep derived fields in step with overrides the pair list did not pin down.
  if (!seen.count("r_mon")) cfg.r_mon = 2 * cfg.n_seq + 2;
  if (!seen.count("r_dis")) cfg.r_dis = cfg.rho + cfg.delta_age;
  if (!seen.count("beta"))
    cfg.beta = Rat(10) * Rat(static_cast<long long>(cfg.f)) * cfg.gamma();
  return cfg;
}

}  // namespace medsim
