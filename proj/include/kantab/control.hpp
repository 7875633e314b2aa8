#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kantab/dynsys.hpp"
#include "kantab/refine.hpp"

namespace kantab {

/// x_{k+1} = F(clamp_X(x_k + u e_dim)) with u drawn from a finite action set.
struct ControlledSystem {
  DynamicalSystem base;
  std::vector<double> actions;
  std::size_t actuated_dim = 0;
  Symbol reward_label = 0;  // r(x) = 1 iff H(x) == reward_label

  void actuate(std::span<const double> x, double u, std::span<double> out) const;
  void step(std::span<const double> x, double u, std::span<double> out) const;
  /// The actuation x -> clamp_X(x + u e_dim) as diagonal pieces over X.
  std::vector<DiagonalPiece> actuation_pieces(double u) const;
};

/// The benchmark with vertical actuation u in {0, 1/4, 1/2}.
ControlledSystem benchmark_controlled_system();

struct AbstractMdp {
  AdaptivePartition partition;
  std::vector<double> actions;
  std::vector<Matrix> transitions;  // one per action, over partition words
  std::vector<double> reward;       // per state
  double gamma = 0.95;
};

/// Per-action transition matrices on a shared state set: the fraction of
/// [w1]_S whose actuated successor lands in [w2]_S. Exact oracles give closed
/// form volumes; sampled oracles reuse their sample count and seed.
AbstractMdp build_mdp(const ControlledSystem& csys, const AdaptivePartition& partition,
                      const RegionMeasureOracle& measures, double gamma);

struct Policy {
  std::vector<Word> words;
  std::vector<double> actions;            // action value per word
  std::vector<std::size_t> action_index;  // into the MDP action list
};

struct ValueIterationResult {
  std::vector<double> values;
  Policy policy;
  std::size_t iterations = 0;
  double residual = 0.0;  // final sup-norm change
};

/// Bellman backups V <- max_a [r + gamma P_a V] until the sup-norm change
/// drops below tol; greedy policy with ties to the lowest action index.
ValueIterationResult value_iteration(const AbstractMdp& mdp, double tol = 1e-8);

/// Where the discount starts in sum_k gamma^k r(x_k).
enum class RewardIndexing {
  FromOne,   // gamma^1 weights r(x_1)
  FromZero,  // gamma^0 weights r(x_1)
};

const char* describe(RewardIndexing indexing);

struct PolicyEvaluation {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trajectories = 0;
  std::size_t length = 0;
  double gamma = 0.0;
  RewardIndexing indexing = RewardIndexing::FromOne;
};

/// Monte Carlo estimate of the closed-loop discounted reward from uniform
/// initial states. Trajectory t draws from its own generator seeded by
/// (seed, t).
PolicyEvaluation evaluate_policy(const ControlledSystem& csys, const AdaptivePartition& partition,
                                 const Policy& policy, double gamma, std::size_t trajectories,
                                 std::size_t length, std::uint64_t seed,
                                 RewardIndexing indexing = RewardIndexing::FromOne);

struct ControlRow {
  std::size_t iteration = 0;
  AdaptivePartition partition;
  ValueIterationResult solution;
  PolicyEvaluation evaluation;
};

struct ControlReport {
  std::vector<ControlRow> rows;
  RefinementTrace trace;
  bool non_decreasing = false;  // within two pooled standard errors
};

struct ControlConfig {
  RefinementConfig refinement;
  double gamma = 0.95;
  std::size_t trajectories = 5000;
  std::size_t length = 1000;
  std::uint64_t seed = 1;
  RewardIndexing indexing = RewardIndexing::FromOne;
};

/// Refines the base system, then solves and evaluates one MDP per partition
/// visited by the refinement.
ControlReport run_control_pipeline(const ControlledSystem& csys, const ControlConfig& config);

/// mean[k+1] >= mean[k] - 2 sqrt(se[k]^2 + se[k+1]^2) for all k.
bool non_decreasing_within_pooled_se(std::span<const PolicyEvaluation> evals);

}  // namespace kantab
