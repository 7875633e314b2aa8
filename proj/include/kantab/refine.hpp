#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kantab/dynsys.hpp"

namespace kantab {

enum class MeasureMode { Exact, Sampled };

struct RefinementConfig {
  std::optional<std::size_t> max_iterations;  // nullopt = unbounded
  double epsilon = 1e-3;
  MeasureMode mode = MeasureMode::Exact;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

enum class StopReason { Deterministic, BudgetExhausted };

const char* to_string(StopReason reason);

struct Candidate {
  Word split_word;
  AdaptivePartition partition;  // after dropping empty children
  double distance = 0.0;        // lower bound on d(current, candidate)
};

struct IterationRecord {
  std::size_t iteration = 0;
  Abstraction abstraction;  // current model
  bool deterministic = false;
  std::vector<Candidate> candidates;  // empty on the final record
  std::optional<std::size_t> chosen;
};

struct RefinementTrace {
  std::vector<IterationRecord> iterations;
  StopReason stop = StopReason::Deterministic;
  double epsilon = 0.0;
  int horizon = 0;
  std::string determinism_band;  // how transition entries were tested against {0, 1}
};

struct RefinementResult {
  Abstraction abstraction;
  RefinementTrace trace;
};

/// Entry-wise test that every transition is 0 or 1. Exact abstractions use an
/// absolute 1e-9 band; sampled ones accept entries within three binomial
/// standard errors of 0 or 1.
bool is_deterministic(const Abstraction& abs);

/// Measure oracle for a configured mode.
std::unique_ptr<RegionMeasureOracle> make_oracle(const DynamicalSystem& sys,
                                                 const RefinementConfig& config);

/// Greedy adaptive refinement: while some transition lies strictly inside
/// (0, 1) and budget remains, split the word whose refinement moves the chain
/// metric the most (ties go to the lowest candidate index).
RefinementResult refine(const DynamicalSystem& sys, const RefinementConfig& config);
RefinementResult refine(const DynamicalSystem& sys, const RefinementConfig& config,
                        const RegionMeasureOracle& measures);

struct BehaviorReport {
  std::size_t horizon = 0;
  std::size_t samples = 0;
  std::vector<Word> observed_not_supported;
  std::vector<Word> supported_not_observed;
  std::size_t observed_words = 0;
  std::size_t supported_words = 0;

  bool ok() const noexcept {
    return observed_not_supported.empty() && supported_not_observed.empty();
  }
};

/// Words of length n with positive probability under the chain.
std::vector<Word> supported_words(const LabeledMarkovChain& chain, std::size_t n);

/// Finite-horizon comparison of simulated output words against the support of
/// the abstraction's word distribution.
BehaviorReport behavior_equivalence_check(const DynamicalSystem& sys, const Abstraction& abs,
                                          std::size_t horizon, std::size_t samples,
                                          std::uint64_t seed);

std::string format_trace_table(const DynamicalSystem& sys, const RefinementTrace& trace);

}  // namespace kantab
