#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kantab/chain.hpp"

namespace kantab {

/// Ground distance on words: base^l with l the 1-based index of the first
/// mismatching symbol. Only base 1/2 is exercised against published values.
struct CantorParams {
  double base = 0.5;
};

double cantor_distance(std::span<const Symbol> w1, std::span<const Symbol> w2,
                       CantorParams params = {});

struct MetricResult {
  double value = 0.0;        // K(p1^n, p2^n)
  int horizon = 0;           // n
  double upper_bound = 0.0;  // value + base^n, bracket on the chain metric
  std::size_t nodes_expanded = 0;
};

/// Kantorovich distance between the n-word distributions of two chains,
/// computed by the prefix-tree recursion in O(|S|^2 |A|^(n+1)).
///
/// Every expanded prefix w at depth k with mass m = min(p1(w), p2(w))
/// contributes (base^k - base^(k+1)) * (m - sum_a min(p1(wa), p2(wa))).
/// Children of mass <= kZeroMass are not expanded.
MetricResult kant_metric(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2, int n,
                         CantorParams params = {});

/// Per-level contributions dK_1..dK_n of the same recursion; they sum to
/// kant_metric(c1, c2, n).value.
std::vector<double> level_increments(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2,
                                     int n, CantorParams params = {});

/// ceil(log2(1/epsilon)), exact at powers of two.
int horizon_for_accuracy(double epsilon);

/// Approximates the chain metric d(c1, c2) from below to within epsilon.
MetricResult chain_metric(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2,
                          double epsilon);

inline constexpr double kZeroMass = 1e-15;

}  // namespace kantab
