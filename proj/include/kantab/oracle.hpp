#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kantab/chain.hpp"
#include "kantab/kantor.hpp"

namespace kantab {

/// Largest |A|^n accepted by enumerate_distribution.
inline constexpr std::size_t kEnumerationGuard = 100000;
/// Largest |A|^n accepted by exact_kantorovich (dense |A|^n x |A|^n transport).
inline constexpr std::size_t kTransportGuard = 243;

/// Explicit distribution over all |A|^n words, lexicographic order.
struct WordDistribution {
  Alphabet alphabet;
  int horizon = 0;
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  Word word(std::size_t index) const;
  std::size_t index_of(std::span<const Symbol> w) const;
};

/// Number of words |A|^n, saturating at SIZE_MAX.
std::size_t word_count(std::size_t alphabet_size, int n);

WordDistribution enumerate_distribution(const LabeledMarkovChain& chain, int n);

/// Sums out the last symbol: horizon n+1 -> n.
WordDistribution marginalize_last(const WordDistribution& dist);

/// Joint distribution pi(w1, w2), row = first marginal.
struct Coupling {
  WordDistribution first;
  WordDistribution second;
  std::vector<double> plan;  // row-major size x size

  std::size_t size() const noexcept { return first.size(); }
  double operator()(std::size_t i, std::size_t j) const { return plan[i * size() + j]; }
};

struct TransportResult {
  double value = 0.0;
  Coupling coupling;
};

/// Minimum expected Cantor distance over couplings of p and q. Solved as a
/// balanced transportation problem by successive shortest augmenting paths.
TransportResult exact_kantorovich(const WordDistribution& p, const WordDistribution& q,
                                  CantorParams params = {});

struct LemmaReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Largest deviation of the coupling's marginals from its two distributions.
double marginal_residual(const Coupling& coupling);

/// pi(w, w) == min(p(w), q(w)) for every word.
LemmaReport check_lemma_diagonal(const Coupling& coupling, double tol = 1e-8);

/// Cross-block flows at horizon n+1 relative to the length-n prefixes:
/// a block with surplus only sends, a block with deficit only receives, and
/// the amounts equal the surplus/deficit.
LemmaReport check_lemma_blockflow(const Coupling& coupling, const WordDistribution& p_n,
                                  const WordDistribution& q_n, double tol = 1e-8);

/// 2^-(n+1) * sum_w [ r(w) - sum_a r(wa) ], with r the pointwise minimum, from
/// explicit distributions at horizons n and n+1.
double prefix_min_increment(const WordDistribution& p_n, const WordDistribution& q_n,
                            const WordDistribution& p_next, const WordDistribution& q_next);

}  // namespace kantab
