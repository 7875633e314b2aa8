#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kantab/geometry.hpp"

using namespace kantab;

namespace {

Box unit_square() {
  const std::vector<double> lo{0, 0}, hi{1, 1};
  return Box::half_open(lo, hi);
}

Box rect(double x0, double y0, double x1, double y1, const Box* space = nullptr) {
  const std::vector<double> lo{x0, y0}, hi{x1, y1};
  return Box::half_open(lo, hi, space);
}

}  // namespace

TEST_CASE("interval closedness") {
  Interval a{0, 1, true, false};
  CHECK(a.contains(0.0));
  CHECK_FALSE(a.contains(1.0));
  Interval b{1, 2, true, true};
  CHECK(a.intersect(b).empty());
  Interval point{1, 1, true, true};
  CHECK_FALSE(point.empty());
  CHECK(point.length() == 0.0);
  Interval open_point{1, 1, true, false};
  CHECK(open_point.empty());
  CHECK(Interval{0, 2, true, false}.intersect(Interval{1, 3, true, true}).length() == 1.0);
}

TEST_CASE("half-open boxes close on the space's upper face") {
  const std::vector<double> lo{0, 0}, hi{2, 1};
  const Box space = Box::closed(lo, hi);
  const Box right = rect(1, 0, 2, 1, &space);
  const std::vector<double> corner{2, 1}, inner{1, 0.5}, left_edge{1, 1};
  CHECK(right.contains(corner));
  CHECK(right.contains(inner));
  const Box left = rect(0, 0, 1, 1, &space);
  CHECK_FALSE(left.contains(inner));
  CHECK(left.contains(std::vector<double>{0.5, 1.0}));
  CHECK(right.contains(left_edge));
}

TEST_CASE("box set algebra preserves volume") {
  BoxSet s(unit_square());
  const auto hole = rect(0.25, 0.25, 0.5, 0.75);
  const auto rest = s.subtract(hole);
  CHECK(rest.volume() == doctest::Approx(1.0 - 0.125));
  CHECK(rest.intersect(hole).volume() == 0.0);
  CHECK(rest.intersect(unit_square()).volume() == doctest::Approx(0.875));
  CHECK_FALSE(rest.contains(std::vector<double>{0.3, 0.5}));
  CHECK(rest.contains(std::vector<double>{0.5, 0.5}));

  // Random points agree with membership of the pieces.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> x{u(rng), u(rng)};
    CHECK(rest.contains(x) == (unit_square().contains(x) && !hole.contains(x)));
  }
}

TEST_CASE("diagonal preimages") {
  DiagonalPiece stretch{unit_square(), {1, 2}, {0, -1}};
  // y -> 2y - 1 maps [1/2, 1) onto [0, 1).
  const auto pre = stretch.preimage(rect(0, 0, 1, 0.5));
  CHECK(pre.volume() == doctest::Approx(0.25));
  CHECK(pre.contains(std::vector<double>{0.5, 0.6}));
  CHECK_FALSE(pre.contains(std::vector<double>{0.5, 0.8}));

  // Negative scale flips the interval.
  DiagonalPiece flip{unit_square(), {-1, 1}, {1, 0}};
  CHECK(flip.preimage(rect(0, 0, 0.25, 1)).volume() == doctest::Approx(0.25));

  // Zero scale: all or nothing.
  DiagonalPiece clamp{unit_square(), {1, 0}, {0, 1}};
  const std::vector<double> lo{0, 1}, hi{1, 1};
  CHECK(clamp.preimage(Box::closed(lo, hi)).volume() == doctest::Approx(1.0));
  CHECK(clamp.preimage(rect(0, 0, 1, 0.5)).empty());

  std::vector<DiagonalPiece> pieces{DiagonalPiece{rect(0, 0, 0.5, 1), {2, 1}, {0, 0}},
                                    DiagonalPiece{rect(0.5, 0, 1, 1), {2, 1}, {-1, 0}}};
  CHECK(preimage(pieces, BoxSet(rect(0, 0, 0.5, 1))).volume() == doctest::Approx(0.5));
}
