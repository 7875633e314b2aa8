#include "kantab/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kantab/error.hpp"

namespace kantab {

void ControlledSystem::actuate(std::span<const double> x, double u, std::span<double> out) const {
  std::copy(x.begin(), x.end(), out.begin());
  const Interval& range = base.space().dims[actuated_dim];
  out[actuated_dim] = std::clamp(x[actuated_dim] + u, range.lo, range.hi);
}

void ControlledSystem::step(std::span<const double> x, double u, std::span<double> out) const {
  std::vector<double> shifted(x.size());
  actuate(x, u, shifted);
  base.step(shifted, out);
}

std::vector<DiagonalPiece> ControlledSystem::actuation_pieces(double u) const {
  const Box& space = base.space();
  const std::size_t d = space.dimension();
  const Interval& range = space.dims[actuated_dim];
  std::vector<double> unit(d, 1.0), zero(d, 0.0);

  DiagonalPiece shifted{space, unit, zero};
  shifted.offset[actuated_dim] = u;
  DiagonalPiece clamped{space, unit, zero};
  clamped.scale[actuated_dim] = 0.0;
  if (u >= 0.0) {
    // [lo, hi - u) moves up by u; [hi - u, hi] sticks to hi.
    shifted.domain.dims[actuated_dim] = range.intersect({range.lo, range.hi - u, true, false});
    clamped.domain.dims[actuated_dim] = range.intersect({range.hi - u, range.hi, true, true});
    clamped.offset[actuated_dim] = range.hi;
  } else {
    clamped.domain.dims[actuated_dim] = range.intersect({range.lo, range.lo - u, true, false});
    clamped.offset[actuated_dim] = range.lo;
    shifted.domain.dims[actuated_dim] = range.intersect({range.lo - u, range.hi, true, true});
  }
  std::vector<DiagonalPiece> pieces;
  if (!shifted.domain.empty()) pieces.push_back(std::move(shifted));
  if (!clamped.domain.empty()) pieces.push_back(std::move(clamped));
  return pieces;
}

ControlledSystem benchmark_controlled_system() {
  return {benchmark_system(), {0.0, 0.25, 0.5}, 1, 0};
}

namespace {

constexpr double kMdpRowTolerance = 1e-6;

void finish_rows(AbstractMdp& mdp, const Alphabet& alphabet) {
  for (std::size_t a = 0; a < mdp.actions.size(); ++a) {
    Matrix& P = mdp.transitions[a];
    for (std::size_t i = 0; i < P.size(); ++i) {
      double sum = 0.0;
      for (double p : P.row(i)) sum += p;
      if (std::abs(sum - 1.0) > kMdpRowTolerance) {
        std::ostringstream msg;
        msg << "action " << mdp.actions[a] << ": row of word "
            << format_word(alphabet, mdp.partition.words()[i]) << " sums to " << sum;
        fail(ErrorKind::OracleInconsistency, msg.str());
      }
      for (double& p : P.row(i)) p /= sum;
    }
  }
}

}  // namespace

AbstractMdp build_mdp(const ControlledSystem& csys, const AdaptivePartition& partition,
                      const RegionMeasureOracle& measures, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::InvalidArgument, "gamma must lie in [0, 1)");
  if (csys.actions.empty()) fail(ErrorKind::InvalidArgument, "controlled system has no actions");
  if (!partition.is_prefix_free())
    fail(ErrorKind::InvalidArgument, "partition words must be prefix-free");

  std::vector<Word> words;
  for (const auto& w : partition.words())
    if (measures.measure(w) > 0.0) words.push_back(w);
  AbstractMdp mdp;
  mdp.partition = AdaptivePartition(words);
  mdp.actions = csys.actions;
  mdp.gamma = gamma;
  const std::size_t n = words.size();
  for (const auto& w : words) mdp.reward.push_back(w.front() == csys.reward_label ? 1.0 : 0.0);
  mdp.transitions.assign(csys.actions.size(), Matrix(n));

  if (const auto* exact = dynamic_cast<const ExactMeasureOracle*>(&measures)) {
    const auto f_pieces = csys.base.diagonal_pieces();
    std::vector<BoxSet> classes;
    for (const auto& w : words) classes.push_back(exact->class_set(w));
    for (std::size_t a = 0; a < csys.actions.size(); ++a) {
      const auto g_pieces = csys.actuation_pieces(csys.actions[a]);
      for (std::size_t j = 0; j < n; ++j) {
        const BoxSet pre = preimage(g_pieces, preimage(f_pieces, classes[j]));
        for (std::size_t i = 0; i < n; ++i) {
          mdp.transitions[a](i, j) = classes[i].intersect(pre).volume() / classes[i].volume();
        }
      }
    }
  } else {
    const Provenance prov = measures.provenance();
    UniformSampler sampler(csys.base.space(), prov.seed);
    std::vector<double> x(csys.base.dimension()), y(csys.base.dimension());
    std::vector<std::vector<double>> counts(csys.actions.size(), std::vector<double>(n * n, 0.0));
    std::vector<double> row_hits(n, 0.0);
    for (std::size_t s = 0; s < prov.samples; ++s) {
      sampler.draw(x);
      const std::size_t i = mdp.partition.locate(csys.base, x);
      row_hits[i] += 1.0;
      for (std::size_t a = 0; a < csys.actions.size(); ++a) {
        csys.step(x, csys.actions[a], y);
        counts[a][i * n + mdp.partition.locate(csys.base, y)] += 1.0;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (row_hits[i] == 0.0)
        fail(ErrorKind::OracleInconsistency,
             "no sample fell in word " + format_word(csys.base.alphabet(), words[i]));
    }
    for (std::size_t a = 0; a < csys.actions.size(); ++a)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          mdp.transitions[a](i, j) = counts[a][i * n + j] / row_hits[i];
  }
  finish_rows(mdp, csys.base.alphabet());
  return mdp;
}

ValueIterationResult value_iteration(const AbstractMdp& mdp, double tol) {
  if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0))
    fail(ErrorKind::InvalidArgument, "gamma must lie in [0, 1)");
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "tolerance must be positive");
  const std::size_t n = mdp.partition.size();
  const std::size_t n_actions = mdp.actions.size();
  if (mdp.transitions.size() != n_actions || mdp.reward.size() != n)
    fail(ErrorKind::InvalidArgument, "MDP shape mismatch");
  for (std::size_t a = 0; a < n_actions; ++a) {
    if (mdp.transitions[a].size() != n) fail(ErrorKind::InvalidArgument, "MDP shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (double p : mdp.transitions[a].row(i)) {
        if (p < 0.0) fail(ErrorKind::Validation, "negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kStochasticTolerance)
        fail(ErrorKind::Validation, "MDP transition matrix is not row-stochastic");
    }
  }

  auto q_value = [&](const std::vector<double>& v, std::size_t s, std::size_t a) {
    double expected = 0.0;
    auto row = mdp.transitions[a].row(s);
    for (std::size_t t = 0; t < n; ++t) expected += row[t] * v[t];
    return mdp.reward[s] + mdp.gamma * expected;
  };

  ValueIterationResult result;
  std::vector<double> v(n, 0.0), next(n);
  while (true) {
    double change = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < n_actions; ++a) best = std::max(best, q_value(v, s, a));
      next[s] = best;
      change = std::max(change, std::abs(best - v[s]));
    }
    v.swap(next);
    ++result.iterations;
    result.residual = change;
    if (change < tol) break;
  }

  result.values = v;
  result.policy.words = mdp.partition.words();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> q(n_actions);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n_actions; ++a) {
      q[a] = q_value(v, s, a);
      best = std::max(best, q[a]);
    }
    const double tie = 1e-12 * std::max(1.0, std::abs(best));
    std::size_t chosen = 0;
    while (q[chosen] < best - tie) ++chosen;
    result.policy.action_index.push_back(chosen);
    result.policy.actions.push_back(mdp.actions[chosen]);
  }
  return result;
}

const char* describe(RewardIndexing indexing) {
  return indexing == RewardIndexing::FromOne ? "sum_{k=1..L} gamma^k r(x_k)"
                                             : "sum_{k=1..L} gamma^(k-1) r(x_k)";
}

PolicyEvaluation evaluate_policy(const ControlledSystem& csys, const AdaptivePartition& partition,
                                 const Policy& policy, double gamma, std::size_t trajectories,
                                 std::size_t length, std::uint64_t seed,
                                 RewardIndexing indexing) {
  if (trajectories == 0) fail(ErrorKind::InvalidArgument, "need at least one trajectory");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::InvalidArgument, "gamma must lie in [0, 1)");
  if (policy.words != partition.words())
    fail(ErrorKind::InvalidArgument, "policy is not defined on the partition words");

  const std::size_t d = csys.base.dimension();
  std::vector<double> totals(trajectories);
  std::vector<double> x(d), y(d);
  for (std::size_t t = 0; t < trajectories; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    UniformSampler sampler(csys.base.space(), std::mt19937_64(seq)());
    sampler.draw(x);
    double weight = indexing == RewardIndexing::FromOne ? gamma : 1.0;
    double total = 0.0;
    for (std::size_t k = 1; k <= length; ++k) {
      if (csys.base.output(x) == csys.reward_label) total += weight;
      weight *= gamma;
      if (k == length) break;
      const std::size_t w = partition.locate(csys.base, x);
      csys.step(x, policy.actions[w], y);
      x.swap(y);
    }
    totals[t] = total;
  }

  PolicyEvaluation eval;
  eval.trajectories = trajectories;
  eval.length = length;
  eval.gamma = gamma;
  eval.indexing = indexing;
  double mean = 0.0;
  for (double v : totals) mean += v;
  mean /= static_cast<double>(trajectories);
  double var = 0.0;
  for (double v : totals) var += (v - mean) * (v - mean);
  if (trajectories > 1) var /= static_cast<double>(trajectories - 1);
  eval.mean = mean;
  eval.std_error = std::sqrt(var / static_cast<double>(trajectories));
  return eval;
}

bool non_decreasing_within_pooled_se(std::span<const PolicyEvaluation> evals) {
  for (std::size_t k = 0; k + 1 < evals.size(); ++k) {
    const double pooled =
        std::sqrt(evals[k].std_error * evals[k].std_error +
                  evals[k + 1].std_error * evals[k + 1].std_error);
    if (evals[k + 1].mean < evals[k].mean - 2.0 * pooled) return false;
  }
  return true;
}

ControlReport run_control_pipeline(const ControlledSystem& csys, const ControlConfig& config) {
  auto oracle = make_oracle(csys.base, config.refinement);
  ControlReport report;
  report.trace = refine(csys.base, config.refinement, *oracle).trace;
  std::vector<PolicyEvaluation> evals;
  for (const auto& rec : report.trace.iterations) {
    ControlRow row;
    row.iteration = rec.iteration;
    const AbstractMdp mdp = build_mdp(csys, rec.abstraction.partition, *oracle, config.gamma);
    row.partition = mdp.partition;
    row.solution = value_iteration(mdp);
    row.evaluation = evaluate_policy(csys, row.partition, row.solution.policy, config.gamma,
                                     config.trajectories, config.length, config.seed,
                                     config.indexing);
    evals.push_back(row.evaluation);
    report.rows.push_back(std::move(row));
  }
  report.non_decreasing = non_decreasing_within_pooled_se(evals);
  return report;
}

}  // namespace kantab
