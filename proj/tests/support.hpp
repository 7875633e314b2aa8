#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "kantab/chain.hpp"

namespace kantab::testing {

inline std::string fixture(const std::string& name) { return std::string(FIXTURES_DIR) + "/" + name; }

/// Two-state i.i.d. chain: uniform over every A^n.
inline LabeledMarkovChain dyadic_left() {
  LabeledMarkovChain c;
  c.alphabet = Alphabet::numeric(2);
  c.transition = Matrix(2, 0.5);
  c.initial = {0.5, 0.5};
  c.labels = {0, 1};
  return c;
}

/// p^2 = (0, 1/4, 1/4, 1/2) on (00, 01, 10, 11).
inline LabeledMarkovChain dyadic_right() {
  LabeledMarkovChain c;
  c.alphabet = Alphabet::numeric(2);
  c.transition = Matrix(3);
  c.transition(0, 2) = 1.0;
  c.transition(1, 0) = 1.0;
  c.transition(2, 2) = 1.0;
  c.initial = {0.25, 0.25, 0.5};
  c.labels = {0, 1, 1};
  return c;
}

/// Random chain with every symbol used as a label when states >= symbols.
/// With `sparse`, roughly half the entries are zeroed (one kept per row).
inline LabeledMarkovChain random_chain(std::size_t states, std::size_t symbols, std::mt19937_64& rng,
                                       bool sparse = false) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution drop(0.5);
  LabeledMarkovChain c;
  c.alphabet = Alphabet::numeric(symbols);
  c.transition = Matrix(states);
  c.initial.assign(states, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, symbols - 1);
  for (std::size_t i = 0; i < states; ++i) c.labels.push_back(i < symbols ? i : pick(rng));
  auto fill = [&](std::span<double> v) {
    double total = 0.0;
    for (double& x : v) total += x = (sparse && drop(rng)) ? 0.0 : unit(rng) + 1e-3;
    if (total == 0.0) {
      v[0] = 1.0;
      total = 1.0;
    }
    for (double& x : v) x /= total;
  };
  fill(c.initial);
  for (std::size_t i = 0; i < states; ++i) fill(c.transition.row(i));
  return c;
}

/// p^n(w) by summing over all |S|^n state paths.
inline double path_sum_probability(const LabeledMarkovChain& c, const Word& w) {
  const std::size_t s = c.n_states();
  std::vector<std::size_t> path(w.size(), 0);
  double total = 0.0;
  while (true) {
    double p = c.initial[path[0]] * (c.labels[path[0]] == w[0] ? 1.0 : 0.0);
    for (std::size_t k = 1; k < w.size() && p > 0.0; ++k)
      p *= c.transition(path[k - 1], path[k]) * (c.labels[path[k]] == w[k] ? 1.0 : 0.0);
    total += p;
    std::size_t k = 0;
    while (k < path.size() && ++path[k] == s) path[k++] = 0;
    if (k == path.size()) break;
  }
  return total;
}

}  // namespace kantab::testing
