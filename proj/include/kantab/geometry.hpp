#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kantab {

/// Real interval with explicit endpoint closedness. Degenerate closed
/// intervals [a, a] are nonempty points.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;

  bool empty() const noexcept;
  double length() const noexcept { return empty() ? 0.0 : hi - lo; }
  bool contains(double x) const noexcept;
  Interval intersect(const Interval& other) const noexcept;

  static Interval everything();
};

/// Axis-aligned product of intervals.
struct Box {
  std::vector<Interval> dims;

  std::size_t dimension() const noexcept { return dims.size(); }
  bool empty() const noexcept;
  double volume() const noexcept;
  bool contains(std::span<const double> x) const noexcept;
  Box intersect(const Box& other) const;

  /// [lower, upper) in every coordinate, closed on coordinates where the
  /// upper bound coincides with the enclosing space's upper bound.
  static Box half_open(std::span<const double> lower, std::span<const double> upper,
                       const Box* space = nullptr);
  /// Fully closed box.
  static Box closed(std::span<const double> lower, std::span<const double> upper);
};

/// Finite union of pairwise disjoint boxes.
class BoxSet {
 public:
  BoxSet() = default;
  explicit BoxSet(Box b);

  const std::vector<Box>& boxes() const noexcept { return boxes_; }
  bool empty() const noexcept { return boxes_.empty(); }
  double volume() const noexcept;
  bool contains(std::span<const double> x) const noexcept;

  /// Caller guarantees disjointness from existing boxes.
  void add_disjoint(Box b);
  void add_disjoint(const BoxSet& other);

  BoxSet intersect(const BoxSet& other) const;
  BoxSet intersect(const Box& other) const;
  BoxSet subtract(const Box& other) const;

 private:
  std::vector<Box> boxes_;
};

/// x -> scale .* x + offset on a box domain (diagonal affine map).
struct DiagonalPiece {
  Box domain;
  std::vector<double> scale;
  std::vector<double> offset;

  /// {x in domain : scale .* x + offset in target}.
  Box preimage(const Box& target) const;
};

/// Preimage of a set under a piecewise diagonal-affine map whose pieces have
/// disjoint domains.
BoxSet preimage(std::span<const DiagonalPiece> pieces, const BoxSet& target);

}  // namespace kantab
