#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kantab {

using Symbol = std::uint32_t;

/// Ordered set of distinct output symbols. Indices are stable.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  /// Alphabet {"0", "1", ..., "k-1"}.
  static Alphabet numeric(std::size_t size);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(Symbol s) const { return names_.at(s); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool contains(Symbol s) const noexcept { return s < names_.size(); }

  /// Throws InvalidArgument when the name is unknown.
  Symbol index_of(std::string_view name) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<std::string> names_;
};

/// Finite sequence of symbols; the empty vector is the empty word.
using Word = std::vector<Symbol>;

/// Concatenates symbol names ("110" for a binary alphabet). Names longer
/// than one character are joined with '.'.
std::string format_word(const Alphabet& alphabet, std::span<const Symbol> word);

/// Inverse of format_word.
Word parse_word(const Alphabet& alphabet, std::string_view text);

/// Dense row-major square matrix of probabilities.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Labeled Markov chain (S, A, P, mu, L). Treated as immutable once built.
struct LabeledMarkovChain {
  Alphabet alphabet;
  Matrix transition;
  std::vector<double> initial;
  std::vector<Symbol> labels;

  std::size_t n_states() const noexcept { return labels.size(); }

  friend bool operator==(const LabeledMarkovChain&, const LabeledMarkovChain&) = default;
};

struct ChainViolation {
  std::string field;  // "transition", "initial", "labels", "shape"
  std::size_t index = 0;
  double residual = 0.0;
  std::string message;
};

inline constexpr double kStochasticTolerance = 1e-9;

/// Empty result iff the chain is well formed.
std::vector<ChainViolation> validate_chain(const LabeledMarkovChain& chain);

/// Throws a Validation error listing every violation.
void require_valid(const LabeledMarkovChain& chain);

/// Joint probability of the current prefix and the current state.
struct ForwardState {
  std::vector<double> alpha;
  double prefix_prob = 0.0;
};

ForwardState initial_forward(const LabeledMarkovChain& chain, Symbol a);
ForwardState extend_prefix(const LabeledMarkovChain& chain, const ForwardState& fs, Symbol a);

/// p^n(w) for a nonempty word.
double word_probability(const LabeledMarkovChain& chain, std::span<const Symbol> w);

}  // namespace kantab
