#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kantab/control.hpp"
#include "kantab/error.hpp"

using namespace kantab;

namespace {

Word w(const char* text) { return parse_word(Alphabet::numeric(2), text); }

AbstractMdp two_state_mdp(double gamma) {
  // State 0: reward 0, action 0 stays, action 1 moves to 1. State 1 absorbs with reward 1.
  AbstractMdp m;
  m.partition = AdaptivePartition({w("0"), w("1")});
  m.actions = {0.0, 1.0};
  Matrix stay(2), move(2);
  stay(0, 0) = 1.0;
  stay(1, 1) = 1.0;
  move(0, 1) = 1.0;
  move(1, 1) = 1.0;
  m.transitions = {stay, move};
  m.reward = {0.0, 1.0};
  m.gamma = gamma;
  return m;
}

}  // namespace

TEST_CASE("actuation clamps to the space") {
  const auto csys = benchmark_controlled_system();
  std::vector<double> out(2);
  csys.actuate(std::vector<double>{0.5, 0.9}, 0.5, out);
  CHECK(out[1] == 1.0);
  csys.actuate(std::vector<double>{0.5, 0.2}, 0.25, out);
  CHECK(out[1] == 0.45);
  CHECK(out[0] == 0.5);
}

TEST_CASE("the zero action reproduces the uncontrolled abstraction") {
  const auto csys = benchmark_controlled_system();
  const ExactMeasureOracle oracle(csys.base);
  const AdaptivePartition part({w("0"), w("10"), w("110"), w("111")});
  const auto abs = build_abstraction(csys.base, part, oracle);
  const auto mdp = build_mdp(csys, part, oracle, 0.95);
  REQUIRE(mdp.actions.front() == 0.0);
  for (std::size_t i = 0; i < part.size(); ++i)
    for (std::size_t j = 0; j < part.size(); ++j)
      CHECK(mdp.transitions[0](i, j) == doctest::Approx(abs.chain.transition(i, j)).epsilon(1e-12));
  for (const auto& P : mdp.transitions)
    for (std::size_t i = 0; i < part.size(); ++i) {
      double row = 0.0;
      for (double p : P.row(i)) row += p;
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
  CHECK(mdp.reward == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("actuated transitions on the benchmark") {
  const auto csys = benchmark_controlled_system();
  const ExactMeasureOracle oracle(csys.base);
  const AdaptivePartition part({w("0"), w("10"), w("11")});
  const auto mdp = build_mdp(csys, part, oracle, 0.95);
  // [11] -> [10] under u = 0 has probability (1/16) / (3/8).
  CHECK(mdp.transitions[0](2, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  // Exact and sampled matrices agree within sampling error.
  const SampledMeasureOracle sampled(csys.base, 200000, 2);
  const auto est = build_mdp(csys, part, sampled, 0.95);
  for (std::size_t a = 0; a < mdp.actions.size(); ++a)
    for (std::size_t i = 0; i < part.size(); ++i)
      for (std::size_t j = 0; j < part.size(); ++j)
        CHECK(std::abs(est.transitions[a](i, j) - mdp.transitions[a](i, j)) < 0.02);
}

TEST_CASE("value iteration closed forms") {
  const auto m = two_state_mdp(0.95);
  const auto r = value_iteration(m);
  CHECK(r.values[1] == doctest::Approx(20.0).epsilon(1e-7));
  CHECK(r.values[0] == doctest::Approx(19.0).epsilon(1e-7));
  CHECK(r.policy.action_index == std::vector<std::size_t>{1, 0});
  CHECK(r.residual < 1e-8);

  AbstractMdp zero = m;
  zero.reward = {0.0, 0.0};
  const auto z = value_iteration(zero);
  CHECK(z.values == std::vector<double>{0.0, 0.0});
  CHECK(z.policy.action_index == std::vector<std::size_t>{0, 0});

  AbstractMdp myopic = m;
  myopic.gamma = 0.0;
  CHECK(value_iteration(myopic).values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("policies are invariant under reward scaling") {
  const auto csys = benchmark_controlled_system();
  const ExactMeasureOracle oracle(csys.base);
  for (const auto& part : {AdaptivePartition({w("0"), w("10"), w("11")}),
                           AdaptivePartition({w("0"), w("10"), w("110"), w("1110"), w("1111")})}) {
    auto mdp = build_mdp(csys, part, oracle, 0.95);
    const auto base = value_iteration(mdp);
    for (double& r : mdp.reward) r *= 3.0;
    CHECK(value_iteration(mdp).policy.action_index == base.policy.action_index);
  }
}

TEST_CASE("policy evaluation conventions") {
  const auto csys = benchmark_controlled_system();
  const AdaptivePartition part({w("0"), w("1")});
  Policy lazy{part.words(), {0.0, 0.0}, {0, 0}};

  // gamma = 0 with the first reward undiscounted: fraction of label-0 starts.
  const auto first = evaluate_policy(csys, part, lazy, 0.0, 20000, 5, 3, RewardIndexing::FromZero);
  CHECK(std::abs(first.mean - 0.5) <= 3 * first.std_error);
  const auto none = evaluate_policy(csys, part, lazy, 0.0, 1000, 5, 3, RewardIndexing::FromOne);
  CHECK(none.mean == 0.0);

  // Always rewarded: a truncated geometric series.
  const auto base = fixed_point_system();
  ControlledSystem always{base, {0.0}, 0, 0};
  const AdaptivePartition single({Word{0}});
  Policy p{single.words(), {0.0}, {0}};
  const auto e = evaluate_policy(always, single, p, 0.95, 10, 1000, 1);
  const double series = 0.95 * (1 - std::pow(0.95, 1000)) / 0.05;
  CHECK(e.mean == doctest::Approx(series).epsilon(1e-10));
  CHECK(e.std_error == doctest::Approx(0.0).scale(1e-9));
}

TEST_CASE("pooled standard error monotonicity") {
  std::vector<PolicyEvaluation> evals(3);
  evals[0].mean = 10.0;
  evals[0].std_error = 0.1;
  evals[1].mean = 9.8;
  evals[1].std_error = 0.1;
  evals[2].mean = 12.0;
  evals[2].std_error = 0.1;
  CHECK(non_decreasing_within_pooled_se(evals));
  evals[1].mean = 9.5;
  CHECK_FALSE(non_decreasing_within_pooled_se(evals));
}

TEST_CASE("benchmark control pipeline") {
  ControlConfig cfg;
  cfg.trajectories = 400;
  cfg.length = 200;
  const auto report = run_control_pipeline(benchmark_controlled_system(), cfg);
  REQUIRE(report.rows.size() == 4);
  const auto& k1 = report.rows[1].solution.policy;
  CHECK(k1.actions == std::vector<double>{0.0, 0.0, 0.25});
  const auto& k2 = report.rows[2].solution.policy;
  CHECK(k2.actions == std::vector<double>{0.0, 0.0, 0.0, 0.25});
  for (const auto& row : report.rows) CHECK(row.evaluation.indexing == RewardIndexing::FromOne);
}
