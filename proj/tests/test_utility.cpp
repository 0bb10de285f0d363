#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "medsim/sim.hpp"
#include "medsim/utility.hpp"

using namespace medsim;

namespace {

SimConfig small(uint64_t seed = 4242) {
  SimConfig cfg = default_config(16);
  cfg.n = 5;
  cfg.master_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("stage utility matches the aggregate formula exactly") {
  RunOptions opt;
  opt.stages = 3;
  Trace tr = run(small(), opt);
  for (int s = 1; s <= 3; ++s) {
    const StageStats& st = tr.per_stage[s - 1];
    for (int i = 0; i < tr.cfg.n; ++i) {
      Rat want = (tr.cfg.beta * Rat(st.benefit[i]) -
                  tr.cfg.alpha * Rat(st.bits_dis[i] + st.bits_mon[i])) /
                 Rat(tr.cfg.rho);
      CHECK(stage_utility(tr, s, i) == want);
    }
  }
  CHECK_THROWS_AS(stage_utility(tr, 4, 1), std::out_of_range);
}

TEST_CASE("discounting a constant stream with a matching tail is exact") {
  // All quantities are dyadic, so the float arithmetic is exact: the
  // geometric series telescopes to u / (1 - delta).
  std::vector<Rat> u(10, Rat(7));
  CHECK(discounted(u, 0.5, 7.0) == 14.0);
  CHECK(discounted(u, 0.25, 7.0) == doctest::Approx(7.0 / 0.75).epsilon(1e-14));

  // Longer horizons with the same tail cannot change the answer.
  std::vector<Rat> longer(37, Rat(7));
  CHECK(discounted(longer, 0.5, 7.0) == 14.0);
}

TEST_CASE("discount factor outside (0,1) is rejected") {
  std::vector<Rat> u(3, Rat(1));
  CHECK_THROWS_AS(discounted(u, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(discounted(u, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(discounted(u, -0.2, 1.0), std::domain_error);
  CHECK_THROWS_AS(discounted(u, 1.5, 1.0), std::domain_error);
}

TEST_CASE("punished stages: zero retrieval, strictly negative utility") {
  SimConfig cfg = small();
  cfg.p_mon = 1.0;
  RunOptions opt;
  opt.stages = 4;
  opt.persistent.node = 1;
  opt.persistent.drop_seqs = 1;
  Trace tr = run(cfg, opt);
  for (int s = 2; s <= 4; ++s) {
    CHECK(tr.per_stage[s - 1].benefit[1] == 0);
    CHECK(stage_utility(tr, s, 1) < Rat(0));
  }
  // A conformant bystander keeps earning in those same stages.
  for (int s = 2; s <= 4; ++s) CHECK(stage_utility(tr, s, 2) > Rat(0));
}

TEST_CASE("utility report agrees with its components") {
  SimConfig cfg = small();
  RunOptions opt;
  opt.stages = 5;
  Trace tr = run(cfg, opt);
  UtilityReport rep = utility_report(tr, 2);
  REQUIRE(rep.stage_u.size() == 5);
  double total = 0.0;
  for (int s = 1; s <= 5; ++s) {
    CHECK(rep.stage_u[s - 1] == stage_utility(tr, s, 2));
    CHECK(rep.benefit[s - 1] == tr.per_stage[s - 1].benefit[2]);
    CHECK(rep.bits[s - 1] ==
          tr.per_stage[s - 1].bits_dis[2] + tr.per_stage[s - 1].bits_mon[2]);
    total += rep.stage_u[s - 1].to_double();
  }
  CHECK(rep.average_u == doctest::Approx(total / 5).epsilon(1e-12));
  CHECK(rep.discounted_u ==
        doctest::Approx(discounted(rep.stage_u, cfg.delta_disc,
                                   rep.stage_u.back().to_double()))
            .epsilon(1e-12));
}

TEST_CASE("zero discount collapses the report to the first stage") {
  SimConfig cfg = small();
  cfg.delta_disc = 0.0;
  RunOptions opt;
  opt.stages = 3;
  Trace tr = run(cfg, opt);
  UtilityReport rep = utility_report(tr, 3);
  CHECK(rep.discounted_u == rep.stage_u.front().to_double());
}

TEST_CASE("message-level retrieval recomputation matches the engine") {
  RunOptions opt;
  opt.stages = 3;
  opt.full_trace = true;
  Trace tr = run(small(), opt);
  for (int s = 1; s <= 3; ++s) {
    for (int i = 1; i < tr.cfg.n; ++i) {
      std::vector<int> rec = rec_set_from_messages(tr, s, i);
      CHECK(static_cast<int>(rec.size()) == tr.per_stage[s - 1].benefit[i]);
      CHECK(std::is_sorted(rec.begin(), rec.end()));
      CHECK(std::adjacent_find(rec.begin(), rec.end()) == rec.end());
    }
  }
}

TEST_CASE("retrieval recomputation survives fabricated payloads") {
  // A premature send circulates a non-genuine payload; the recomputation must
  // reject it for every reader just as the engine does.
  SimConfig cfg = small();
  DeviationPlan plan;
  plan.kind = DevKind::PrematureSend;
  plan.node = 1;
  plan.stage = 2;
  RunOptions opt;
  opt.stages = 3;
  opt.full_trace = true;
  opt.plan = &plan;
  Trace tr = run(cfg, opt);
  for (int s = 1; s <= 3; ++s) {
    for (int i = 1; i < tr.cfg.n; ++i) {
      std::vector<int> rec = rec_set_from_messages(tr, s, i);
      CHECK(static_cast<int>(rec.size()) == tr.per_stage[s - 1].benefit[i]);
    }
  }
}

TEST_CASE("retrieval recomputation survives punishment ciphering") {
  SimConfig cfg = small();
  cfg.p_mon = 1.0;
  RunOptions opt;
  opt.stages = 4;
  opt.full_trace = true;
  opt.persistent.node = 1;
  opt.persistent.drop_seqs = 1;
  Trace tr = run(cfg, opt);
  for (int s = 1; s <= 4; ++s) {
    for (int i = 1; i < tr.cfg.n; ++i) {
      std::vector<int> rec = rec_set_from_messages(tr, s, i);
      CHECK(static_cast<int>(rec.size()) == tr.per_stage[s - 1].benefit[i]);
    }
  }
}

TEST_CASE("retrieval recomputation requires a full trace") {
  RunOptions opt;
  opt.stages = 1;
  Trace tr = run(small(), opt);
  CHECK_THROWS_AS(rec_set_from_messages(tr, 1, 1), std::invalid_argument);
}
