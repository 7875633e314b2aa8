#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "kantab/error.hpp"
#include "kantab/io.hpp"
#include "kantab/refine.hpp"

using namespace kantab;

namespace {

std::vector<std::string> words_of(const DynamicalSystem& sys, const AdaptivePartition& p) {
  std::vector<std::string> out;
  for (const auto& w : p.words()) out.push_back(format_word(sys.alphabet(), w));
  return out;
}

using Strings = std::vector<std::string>;

const std::vector<Strings> kExpectedSequence{{"0", "1"},
                                             {"0", "10", "11"},
                                             {"0", "10", "110", "111"},
                                             {"0", "10", "110", "1110", "1111"}};

}  // namespace

TEST_CASE("benchmark refinement sequence (exact)") {
  const auto sys = benchmark_system();
  const auto result = refine(sys, RefinementConfig{});
  const auto& it = result.trace.iterations;
  REQUIRE(it.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(it[k].iteration == k);
    CHECK(words_of(sys, it[k].abstraction.partition) == kExpectedSequence[k]);
    CHECK(it[k].deterministic == (k == 3));
  }
  CHECK(result.trace.stop == StopReason::Deterministic);
  CHECK(result.trace.horizon == 10);
  CHECK(it.back().candidates.empty());
  CHECK(is_deterministic(result.abstraction));
}

TEST_CASE("refinement invariants") {
  const auto sys = benchmark_system();
  const auto result = refine(sys, RefinementConfig{});
  for (const auto& rec : result.trace.iterations) {
    if (rec.candidates.empty()) continue;
    REQUIRE(rec.chosen);
    const auto& chosen = rec.candidates[*rec.chosen];
    for (std::size_t i = 0; i < rec.candidates.size(); ++i) {
      const double d = rec.candidates[i].distance;
      CHECK(d >= 0.0);
      CHECK(d <= 0.5);
      // Strictly smaller before the chosen index, no larger after it.
      if (i < *rec.chosen) CHECK(d < chosen.distance);
      if (i > *rec.chosen) CHECK(d <= chosen.distance);
    }
    // The next model is the chosen candidate, a one-word refinement.
    const auto& next = result.trace.iterations[rec.iteration + 1].abstraction.partition;
    CHECK(next == chosen.partition);
    CHECK(next.is_prefix_free());
    CHECK(next.size() == rec.abstraction.partition.size() + sys.alphabet().size() - 1);
  }
}

TEST_CASE("budgeted refinement") {
  const auto sys = benchmark_system();
  RefinementConfig cfg;
  cfg.max_iterations = 0;
  auto r = refine(sys, cfg);
  CHECK(r.trace.stop == StopReason::BudgetExhausted);
  CHECK(r.trace.iterations.size() == 1);
  CHECK(words_of(sys, r.abstraction.partition) == kExpectedSequence[0]);

  cfg.max_iterations = 1;
  r = refine(sys, cfg);
  CHECK(r.trace.stop == StopReason::BudgetExhausted);
  CHECK(r.trace.iterations.size() == 2);
  CHECK(words_of(sys, r.abstraction.partition) == kExpectedSequence[1]);

  cfg.max_iterations = 3;
  CHECK(refine(sys, cfg).trace.stop == StopReason::Deterministic);
  CHECK(std::string(to_string(StopReason::BudgetExhausted)) == "budget-exhausted");
}

TEST_CASE("a system with one constant output stops immediately") {
  const auto sys = fixed_point_system();
  const auto r = refine(sys, RefinementConfig{});
  CHECK(r.trace.stop == StopReason::Deterministic);
  CHECK(r.trace.iterations.size() == 1);
  CHECK(r.abstraction.chain.transition(0, 0) == 1.0);
}

TEST_CASE("sampled mode follows the same sequence") {
  const auto sys = benchmark_system();
  RefinementConfig cfg;
  cfg.mode = MeasureMode::Sampled;
  cfg.samples = 200000;
  cfg.seed = 3;
  const auto r = refine(sys, cfg);
  REQUIRE(r.trace.iterations.size() == 4);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(words_of(sys, r.trace.iterations[k].abstraction.partition) == kExpectedSequence[k]);
  CHECK(r.trace.stop == StopReason::Deterministic);
  CHECK(r.trace.determinism_band.find("sampled") != std::string::npos);
}

TEST_CASE("final abstraction reproduces the system's output words") {
  const auto sys = benchmark_system();
  const auto r = refine(sys, RefinementConfig{});
  const auto report = behavior_equivalence_check(sys, r.abstraction, 10, 20000, 8);
  CHECK(report.ok());
  CHECK(report.observed_words == report.supported_words);

  // A flipped label must be caught.
  Abstraction broken = r.abstraction;
  broken.chain.labels[1] = 1 - broken.chain.labels[1];
  CHECK_FALSE(behavior_equivalence_check(sys, broken, 10, 20000, 8).ok());

  // The initial model over-approximates the behavior.
  const auto coarse = r.trace.iterations.front().abstraction;
  const auto coarse_report = behavior_equivalence_check(sys, coarse, 10, 20000, 8);
  CHECK(coarse_report.observed_not_supported.empty());
  CHECK_FALSE(coarse_report.supported_not_observed.empty());
}

TEST_CASE("traces are reproducible") {
  const auto sys = benchmark_system();
  RefinementConfig cfg;
  cfg.mode = MeasureMode::Sampled;
  cfg.samples = 50000;
  const auto a = io::trace_to_json(sys, refine(sys, cfg).trace).dump();
  const auto b = io::trace_to_json(sys, refine(sys, cfg).trace).dump();
  CHECK(a == b);
  const auto table = format_trace_table(sys, refine(sys, RefinementConfig{}).trace);
  CHECK(table.find("{0, 1*}") != std::string::npos);
  CHECK(table.find("stop: deterministic") != std::string::npos);
}
