#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kantab/error.hpp"
#include "kantab/oracle.hpp"
#include "support.hpp"

using namespace kantab;
using kantab::testing::dyadic_left;
using kantab::testing::dyadic_right;
using kantab::testing::random_chain;

namespace {

WordDistribution dist2(std::vector<double> probs) {
  WordDistribution d;
  d.alphabet = Alphabet::numeric(2);
  d.horizon = 2;
  d.probs = std::move(probs);
  return d;
}

}  // namespace

TEST_CASE("word indexing is lexicographic") {
  const auto d = enumerate_distribution(dyadic_right(), 3);
  CHECK(d.size() == 8);
  CHECK(d.word(6) == Word{1, 1, 0});
  CHECK(d.index_of(Word{1, 1, 0}) == 6);
  CHECK(word_count(3, 5) == 243);
}

TEST_CASE("two-word transport problems with known answers") {
  // All mass on 00 against all mass on 01: distance 1/4.
  CHECK(exact_kantorovich(dist2({1, 0, 0, 0}), dist2({0, 1, 0, 0})).value == 0.25);
  // Half moves from 00 to 10: 1/2 * 1/2.
  CHECK(exact_kantorovich(dist2({1, 0, 0, 0}), dist2({0.5, 0, 0.5, 0})).value == 0.25);
  // Nearby sibling is cheaper than crossing the root.
  const auto r = exact_kantorovich(dist2({0.5, 0, 0.5, 0}), dist2({0, 0.5, 0, 0.5}));
  CHECK(r.value == 0.25);
  CHECK(r.coupling(0, 1) == 0.5);
  CHECK(r.coupling(2, 3) == 0.5);
}

TEST_CASE("dyadic pair: optimal coupling moves 1/4 from 00 to 11") {
  const auto p = enumerate_distribution(dyadic_left(), 2);
  const auto q = enumerate_distribution(dyadic_right(), 2);
  const auto r = exact_kantorovich(p, q);
  CHECK(r.value == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(r.coupling(0, 3) == doctest::Approx(0.25));
  for (std::size_t i = 1; i < 4; ++i) CHECK(r.coupling(i, i) == doctest::Approx(0.25));
  CHECK(marginal_residual(r.coupling) <= 1e-12);
  CHECK(check_lemma_diagonal(r.coupling).ok());
}

TEST_CASE("lemma checks hold on optimal couplings") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_chain(3, 2, rng, trial % 2 == 0);
    const auto b = random_chain(2 + trial % 3, 2, rng, trial % 3 == 0);
    const int n = 1 + trial % 4;
    const auto pn = enumerate_distribution(a, n);
    const auto qn = enumerate_distribution(b, n);
    const auto r = exact_kantorovich(enumerate_distribution(a, n + 1), enumerate_distribution(b, n + 1));
    CHECK(marginal_residual(r.coupling) <= 1e-12);
    CHECK(check_lemma_diagonal(r.coupling).ok());
    CHECK(check_lemma_blockflow(r.coupling, pn, qn).ok());
  }
}

TEST_CASE("lemma checks flag a feasible but suboptimal coupling") {
  const auto p = enumerate_distribution(dyadic_left(), 2);
  const auto q = enumerate_distribution(dyadic_right(), 2);
  Coupling product{p, q, std::vector<double>(16)};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) product.plan[i * 4 + j] = p.probs[i] * q.probs[j];
  CHECK(marginal_residual(product) <= 1e-15);
  CHECK_FALSE(check_lemma_diagonal(product).ok());
  CHECK_FALSE(check_lemma_blockflow(product, enumerate_distribution(dyadic_left(), 1),
                                    enumerate_distribution(dyadic_right(), 1))
                  .ok());
}

TEST_CASE("telescoping increment matches consecutive oracle values") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 15; ++trial) {
    const auto a = random_chain(3, 2, rng, trial % 2 == 1);
    const auto b = random_chain(3, 2, rng);
    for (int n = 1; n <= 3; ++n) {
      const auto pn = enumerate_distribution(a, n), qn = enumerate_distribution(b, n);
      const auto pm = enumerate_distribution(a, n + 1), qm = enumerate_distribution(b, n + 1);
      const double lhs = exact_kantorovich(pm, qm).value - exact_kantorovich(pn, qn).value;
      CHECK(lhs == doctest::Approx(prefix_min_increment(pn, qn, pm, qm)).epsilon(1e-9));
    }
  }
}

TEST_CASE("guards") {
  const auto big = enumerate_distribution(dyadic_left(), 8);
  CHECK(big.size() == 256);
  try {
    exact_kantorovich(big, big);
    FAIL("expected a guard error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Guard);
  }
  std::mt19937_64 rng(33);
  const auto at_limit = enumerate_distribution(random_chain(3, 3, rng), 5);
  CHECK(at_limit.size() == kTransportGuard);
  CHECK_NOTHROW(exact_kantorovich(at_limit, at_limit));
  try {
    enumerate_distribution(dyadic_left(), 17);
    FAIL("expected a guard error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Guard);
  }
  CHECK_THROWS_AS(exact_kantorovich(dist2({1, 0, 0, 0}), enumerate_distribution(dyadic_left(), 3)), Error);
  CHECK_THROWS_AS(exact_kantorovich(dist2({1, 0, 0, 0}), dist2({0.5, 0, 0, 0})), Error);
}
