#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kantab/chain.hpp"
#include "kantab/geometry.hpp"

namespace kantab {

/// x -> A x + b, A stored row-major.
struct AffineMap {
  std::vector<double> matrix;
  std::vector<double> offset;

  std::size_t dimension() const noexcept { return offset.size(); }
  void apply(std::span<const double> x, std::span<double> out) const;
  bool is_diagonal() const noexcept;

  static AffineMap identity(std::size_t dim);
  static AffineMap diagonal(std::vector<double> scale, std::vector<double> offset);
};

struct Region {
  std::string name;
  Box area;
  AffineMap map;
  Symbol label = 0;
};

/// Map and label applied on the part of the space no listed region covers.
struct DefaultRule {
  AffineMap map;
  Symbol label = 0;
};

/// Deterministic piecewise-affine system x_{k+1} = F(x_k), y_k = H(x_k) on a
/// box. Regions are half-open boxes (closed at the upper face of the space)
/// and must tile the space.
class DynamicalSystem {
 public:
  DynamicalSystem(std::string name, Box space, Alphabet alphabet, std::vector<Region> regions,
                  std::optional<DefaultRule> default_rule = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const Box& space() const noexcept { return space_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t dimension() const noexcept { return space_.dimension(); }
  const std::vector<Region>& regions() const noexcept { return regions_; }

  /// Index of the region containing x; throws Covering when none does.
  std::size_t locate(std::span<const double> x) const;
  Symbol output(std::span<const double> x) const;
  void step(std::span<const double> x, std::span<double> out) const;
  std::vector<double> step(std::span<const double> x) const;

  /// Output word of length n starting at x (n - 1 applications of F).
  Word output_word(std::span<const double> x, std::size_t n) const;

  bool has_diagonal_maps() const noexcept;
  /// The map as diagonal pieces; throws InvalidArgument for non-diagonal maps.
  std::vector<DiagonalPiece> diagonal_pieces() const;
  /// H^{-1}(a).
  BoxSet label_set(Symbol a) const;

 private:
  std::string name_;
  Box space_;
  Alphabet alphabet_;
  std::vector<Region> regions_;
};

/// Structural problems: overlap, gaps, maps leaving the space (checked
/// exactly on region corners, which suffices for affine maps).
std::vector<std::string> validate_system(const DynamicalSystem& sys);

/// Uniform points in the space from a seeded generator.
class UniformSampler {
 public:
  UniformSampler(const Box& space, std::uint64_t seed);
  void draw(std::span<double> out);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Fraction of sampled points whose image leaves the space.
std::size_t count_escapes(const DynamicalSystem& sys, std::size_t samples, std::uint64_t seed);

/// x in [w]_S: H(F^{k-1}(x)) = w_k for k = 1..|w|.
bool class_membership(const DynamicalSystem& sys, std::span<const double> x,
                      std::span<const Symbol> w);

/// Five-region system on [0,2]x[0,1] with a fixed label-0 region and a chain
/// of label-1 regions P2 -> P3 -> {P4, P5}, P5 -> P1.
DynamicalSystem benchmark_system();

/// One-region system: H constant 0 and F the identity on [0,1].
DynamicalSystem fixed_point_system();

struct Provenance {
  enum class Kind { Exact, Sampled };
  Kind kind = Kind::Exact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// lambda_X([w]_S), normalized so that lambda_X(X) = 1.
class RegionMeasureOracle {
 public:
  virtual ~RegionMeasureOracle() = default;
  virtual double measure(const Word& w) const = 0;
  virtual Provenance provenance() const = 0;
};

/// Closed-form volumes by propagating boxes backwards through diagonal
/// affine pieces. Results are memoized per word.
class ExactMeasureOracle final : public RegionMeasureOracle {
 public:
  explicit ExactMeasureOracle(DynamicalSystem sys);

  double measure(const Word& w) const override;
  Provenance provenance() const override { return {}; }

  /// [w]_S as a disjoint box union.
  BoxSet class_set(const Word& w) const;
  const DynamicalSystem& system() const noexcept { return sys_; }

 private:
  DynamicalSystem sys_;
  std::vector<DiagonalPiece> pieces_;
  double space_volume_;
  mutable std::mutex mutex_;
  mutable std::map<Word, BoxSet> cache_;
};

/// Monte Carlo volumes from one fixed cloud of uniform samples, so the
/// estimates telescope exactly across words.
class SampledMeasureOracle final : public RegionMeasureOracle {
 public:
  SampledMeasureOracle(DynamicalSystem sys, std::size_t samples, std::uint64_t seed);

  double measure(const Word& w) const override;
  Provenance provenance() const override;
  std::size_t hits(const Word& w) const;
  std::size_t samples() const noexcept { return samples_; }

 private:
  void extend_to(std::size_t depth) const;

  DynamicalSystem sys_;
  std::size_t samples_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  mutable std::vector<double> states_;                // current point per sample
  mutable std::vector<std::vector<Symbol>> outputs_;  // outputs_[k][i] = H(F^k(x_i))
  mutable std::map<Word, std::size_t> cache_;
};

/// Prefix-free word set whose classes tile the space. Words are kept in
/// lexicographic order, which is also the candidate order during refinement.
class AdaptivePartition {
 public:
  AdaptivePartition() = default;
  explicit AdaptivePartition(std::vector<Word> words);

  static AdaptivePartition initial(const Alphabet& alphabet);

  const std::vector<Word>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool is_prefix_free() const;
  std::size_t max_length() const;

  /// Index of the word that is a prefix of `trajectory`, if any.
  std::optional<std::size_t> match(std::span<const Symbol> trajectory) const;
  /// Word whose class contains x; throws Covering when none.
  std::size_t locate(const DynamicalSystem& sys, std::span<const double> x) const;

  /// Replaces word i by its |A| one-symbol extensions.
  AdaptivePartition split(std::size_t i, std::size_t alphabet_size) const;

  friend bool operator==(const AdaptivePartition&, const AdaptivePartition&) = default;

 private:
  std::vector<Word> words_;
};

/// Points that fall in zero or several classes of the partition.
std::size_t covering_violations(const DynamicalSystem& sys, const AdaptivePartition& partition,
                                std::size_t samples, std::uint64_t seed);

/// Markov chain on partition words with volumes as initial measure and
/// volume ratios as transitions.
struct Abstraction {
  AdaptivePartition partition;
  LabeledMarkovChain chain;
  std::vector<double> measures;  // lambda_X([w]_S) per state
  Provenance provenance;
};

/// Tolerated row-sum defect before renormalization.
inline constexpr double kExactRowTolerance = 1e-6;
inline constexpr double kSampledRowTolerance = 5e-2;

/// Zero-measure words are dropped first. With k = min(|w1| - 1, |w2|), the
/// transition w1 -> w2 is nonzero only when w1 shifted by one symbol agrees
/// with w2 on the first k symbols; its value is the measure of
/// [w1] ∩ [a1 w2] relative to [w1].
Abstraction build_abstraction(const DynamicalSystem& sys, const AdaptivePartition& partition,
                              const RegionMeasureOracle& measures);

}  // namespace kantab
