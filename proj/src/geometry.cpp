#include "kantab/geometry.hpp"

#include <algorithm>
#include <limits>

#include "kantab/error.hpp"

namespace kantab {

bool Interval::empty() const noexcept {
  if (lo < hi) return false;
  if (lo > hi) return true;
  return !(lo_closed && hi_closed);
}

bool Interval::contains(double x) const noexcept {
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

Interval Interval::intersect(const Interval& other) const noexcept {
  Interval out;
  if (lo > other.lo) {
    out.lo = lo;
    out.lo_closed = lo_closed;
  } else if (other.lo > lo) {
    out.lo = other.lo;
    out.lo_closed = other.lo_closed;
  } else {
    out.lo = lo;
    out.lo_closed = lo_closed && other.lo_closed;
  }
  if (hi < other.hi) {
    out.hi = hi;
    out.hi_closed = hi_closed;
  } else if (other.hi < hi) {
    out.hi = other.hi;
    out.hi_closed = other.hi_closed;
  } else {
    out.hi = hi;
    out.hi_closed = hi_closed && other.hi_closed;
  }
  return out;
}

Interval Interval::everything() {
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf, false, false};
}

bool Box::empty() const noexcept {
  return std::any_of(dims.begin(), dims.end(), [](const Interval& i) { return i.empty(); });
}

double Box::volume() const noexcept {
  if (dims.empty()) return 0.0;
  double v = 1.0;
  for (const auto& i : dims) v *= i.length();
  return v;
}

bool Box::contains(std::span<const double> x) const noexcept {
  if (x.size() != dims.size()) return false;
  for (std::size_t d = 0; d < dims.size(); ++d)
    if (!dims[d].contains(x[d])) return false;
  return true;
}

Box Box::intersect(const Box& other) const {
  if (other.dims.size() != dims.size())
    fail(ErrorKind::InvalidArgument, "box dimension mismatch");
  Box out;
  out.dims.reserve(dims.size());
  for (std::size_t d = 0; d < dims.size(); ++d) out.dims.push_back(dims[d].intersect(other.dims[d]));
  return out;
}

Box Box::half_open(std::span<const double> lower, std::span<const double> upper,
                   const Box* space) {
  if (lower.size() != upper.size()) fail(ErrorKind::InvalidArgument, "bound length mismatch");
  Box b;
  for (std::size_t d = 0; d < lower.size(); ++d) {
    const bool closed_top = space != nullptr && upper[d] == space->dims.at(d).hi;
    b.dims.push_back({lower[d], upper[d], true, closed_top});
  }
  return b;
}

Box Box::closed(std::span<const double> lower, std::span<const double> upper) {
  if (lower.size() != upper.size()) fail(ErrorKind::InvalidArgument, "bound length mismatch");
  Box b;
  for (std::size_t d = 0; d < lower.size(); ++d) b.dims.push_back({lower[d], upper[d], true, true});
  return b;
}

BoxSet::BoxSet(Box b) {
  if (!b.empty()) boxes_.push_back(std::move(b));
}

double BoxSet::volume() const noexcept {
  double v = 0.0;
  for (const auto& b : boxes_) v += b.volume();
  return v;
}

bool BoxSet::contains(std::span<const double> x) const noexcept {
  return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains(x); });
}

void BoxSet::add_disjoint(Box b) {
  if (!b.empty()) boxes_.push_back(std::move(b));
}

void BoxSet::add_disjoint(const BoxSet& other) {
  for (const auto& b : other.boxes_) boxes_.push_back(b);
}

BoxSet BoxSet::intersect(const Box& other) const {
  BoxSet out;
  for (const auto& b : boxes_) out.add_disjoint(b.intersect(other));
  return out;
}

BoxSet BoxSet::intersect(const BoxSet& other) const {
  BoxSet out;
  for (const auto& a : boxes_)
    for (const auto& b : other.boxes_) out.add_disjoint(a.intersect(b));
  return out;
}

BoxSet BoxSet::subtract(const Box& cut) const {
  BoxSet out;
  for (const auto& b : boxes_) {
    if (b.intersect(cut).empty()) {
      out.boxes_.push_back(b);
      continue;
    }
    // Peel off the parts below and above the cut one coordinate at a time;
    // what remains after the last coordinate lies inside the cut.
    Box rest = b;
    for (std::size_t d = 0; d < b.dims.size(); ++d) {
      const Interval& c = cut.dims[d];
      Box below = rest;
      below.dims[d] = rest.dims[d].intersect(
          Interval{-std::numeric_limits<double>::infinity(), c.lo, false, !c.lo_closed});
      out.add_disjoint(std::move(below));
      Box above = rest;
      above.dims[d] = rest.dims[d].intersect(
          Interval{c.hi, std::numeric_limits<double>::infinity(), !c.hi_closed, false});
      out.add_disjoint(std::move(above));
      rest.dims[d] = rest.dims[d].intersect(c);
    }
  }
  return out;
}

Box DiagonalPiece::preimage(const Box& target) const {
  Box out = domain;
  for (std::size_t d = 0; d < domain.dims.size(); ++d) {
    const Interval& t = target.dims[d];
    const double s = scale[d];
    const double o = offset[d];
    Interval pre;
    if (s > 0.0) {
      pre = {(t.lo - o) / s, (t.hi - o) / s, t.lo_closed, t.hi_closed};
    } else if (s < 0.0) {
      pre = {(t.hi - o) / s, (t.lo - o) / s, t.hi_closed, t.lo_closed};
    } else {
      pre = t.contains(o) ? Interval::everything() : Interval{0.0, 0.0, false, false};
    }
    out.dims[d] = out.dims[d].intersect(pre);
  }
  return out;
}

BoxSet preimage(std::span<const DiagonalPiece> pieces, const BoxSet& target) {
  BoxSet out;
  for (const auto& piece : pieces)
    for (const auto& box : target.boxes()) out.add_disjoint(piece.preimage(box));
  return out;
}

}  // namespace kantab
