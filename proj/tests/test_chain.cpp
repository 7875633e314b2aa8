#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kantab/chain.hpp"
#include "kantab/error.hpp"
#include "kantab/oracle.hpp"
#include "support.hpp"

using namespace kantab;
using kantab::testing::dyadic_left;
using kantab::testing::dyadic_right;
using kantab::testing::path_sum_probability;
using kantab::testing::random_chain;

TEST_CASE("alphabet and word formatting") {
  const Alphabet a = Alphabet::numeric(3);
  CHECK(a.size() == 3);
  CHECK(a.index_of("2") == 2);
  CHECK_THROWS_AS(a.index_of("x"), Error);
  CHECK(format_word(a, Word{1, 1, 0}) == "110");
  CHECK(parse_word(a, "201") == Word{2, 0, 1});

  const Alphabet named({"up", "down"});
  CHECK(format_word(named, Word{0, 1}) == "up.down");
  CHECK(parse_word(named, "up.down") == Word{0, 1});
}

TEST_CASE("validation reports each defect") {
  auto c = dyadic_right();
  CHECK(validate_chain(c).empty());

  c.transition(0, 2) = 0.9;
  auto v = validate_chain(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "transition");
  CHECK(v[0].index == 0);
  CHECK(v[0].residual == doctest::Approx(0.1));

  c = dyadic_right();
  c.initial = {0.5, 0.5, 0.5};
  CHECK(validate_chain(c).front().field == "initial");

  c = dyadic_right();
  c.labels[1] = 7;
  CHECK(validate_chain(c).front().field == "labels");

  c = dyadic_right();
  c.transition(1, 1) = -0.25;
  c.transition(1, 0) = 1.25;
  CHECK_FALSE(validate_chain(c).empty());
  CHECK_THROWS_AS(require_valid(c), Error);

  c = dyadic_right();
  c.initial.pop_back();
  CHECK(validate_chain(c).front().field == "shape");
}

TEST_CASE("dyadic pair word probabilities") {
  const auto left = enumerate_distribution(dyadic_left(), 2);
  for (double p : left.probs) CHECK(p == 0.25);
  const auto right = enumerate_distribution(dyadic_right(), 2);
  CHECK(right.probs == std::vector<double>{0.0, 0.25, 0.25, 0.5});
}

TEST_CASE("forward recursion matches brute-force path sums") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_chain(1 + trial % 4, 2 + trial % 2, rng, trial % 3 == 0);
    const auto dist = enumerate_distribution(c, 4);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const Word w = dist.word(i);
      const double brute = path_sum_probability(c, w);
      CHECK(word_probability(c, w) == doctest::Approx(brute).epsilon(1e-12));
      CHECK(dist.probs[i] == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("prefix consistency: sum over one-symbol extensions") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = random_chain(3, 3, rng, trial % 2 == 1);
    for (int n = 1; n <= 5; ++n) {
      const auto pn = enumerate_distribution(c, n);
      const auto marg = marginalize_last(enumerate_distribution(c, n + 1));
      double total = 0.0;
      for (std::size_t i = 0; i < pn.size(); ++i) {
        CHECK(std::abs(pn.probs[i] - marg.probs[i]) <= 1e-12);
        total += pn.probs[i];
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("forward state extension") {
  const auto c = dyadic_right();
  const auto f1 = initial_forward(c, 1);
  CHECK(f1.prefix_prob == 0.75);
  const auto f2 = extend_prefix(c, f1, 0);
  CHECK(f2.prefix_prob == 0.25);
  CHECK(f2.alpha == std::vector<double>{0.25, 0.0, 0.0});
  CHECK_THROWS_AS(word_probability(c, Word{}), Error);
}
