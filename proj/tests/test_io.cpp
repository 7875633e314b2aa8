#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kantab/error.hpp"
#include "kantab/io.hpp"
#include "kantab/kantor.hpp"
#include "support.hpp"

using namespace kantab;
using kantab::testing::fixture;
using kantab::testing::random_chain;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("dyadic pair fixtures") {
  const auto left = io::load_chain(fixture("dyadic_left.json"));
  const auto right = io::load_chain(fixture("dyadic_right.json"));
  CHECK(left == kantab::testing::dyadic_left());
  CHECK(right == kantab::testing::dyadic_right());
  CHECK(kant_metric(left, right, 2).value == 0.125);
}

TEST_CASE("chain round trip is bit-identical") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_chain(1 + trial % 5, 2 + trial % 3, rng, trial % 2 == 0);
    const auto text = io::serialize_chain(c);
    const auto back = io::parse_chain(text);
    CHECK(back == c);
    CHECK(io::serialize_chain(back) == text);
  }
}

TEST_CASE("chain parse errors") {
  const std::string good = R"({"schema": "kantab.chain/1", "alphabet": ["a"],
    "states": [{"id": "x", "label": "a"}], "initial": {"x": "1"},
    "transitions": {"dense": [["1"]]}})";
  CHECK(io::parse_chain(good).n_states() == 1);

  auto with = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK(kind_of([&] { io::parse_chain("{ not json"); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { io::parse_chain(with("\"alphabet\"", "\"extra\": 1, \"alphabet\"")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([&] { io::parse_chain(with("kantab.chain/1", "kantab.chain/9")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([&] { io::parse_chain(with("\"label\": \"a\"", "\"label\": \"b\"")); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([&] { io::parse_chain(with("[[\"1\"]]", "[[\"0.5\"]]")); }) ==
        ErrorKind::Validation);
  CHECK(kind_of([&] { io::parse_chain(with("\"1\"}", "\"abc\"}")); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { io::load_chain(fixture("does_not_exist.json")); }) == ErrorKind::Parse);

  try {
    io::parse_chain("{\n  \"schema\": ,\n}", "bad.json");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("sparse transitions") {
  const std::string text = R"({"schema": "kantab.chain/1", "alphabet": ["0", "1"],
    "states": [{"id": "p", "label": "0"}, {"id": "q", "label": "1"}],
    "initial": {"q": 1.0},
    "transitions": {"sparse": [["p", "q", "0.25"], ["p", "p", "0.75"], ["q", "q", "1"]]}})";
  const auto c = io::parse_chain(text);
  CHECK(c.initial == std::vector<double>{0.0, 1.0});
  CHECK(c.transition(0, 1) == 0.25);
  CHECK(c.transition(0, 0) == 0.75);
}

TEST_CASE("system documents") {
  const auto doc = io::parse_system(io::benchmark_system_document());
  REQUIRE(doc.controlled);
  CHECK(doc.controlled->actions == std::vector<double>{0.0, 0.25, 0.5});
  const ExactMeasureOracle a(doc.system), b(benchmark_system());
  for (const char* w : {"0", "10", "110", "1110", "1111"}) {
    const Word word = parse_word(doc.system.alphabet(), w);
    CHECK(a.measure(word) == b.measure(word));
  }
  const auto from_file = io::load_system(fixture("benchmark_system.json"));
  CHECK(from_file.system.regions().size() == 5);

  std::string broken = io::benchmark_system_document();
  broken.replace(broken.find("\"P2\""), 4, "\"P2\", \"color\": \"red\"");
  CHECK(kind_of([&] { io::parse_system(broken); }) == ErrorKind::Parse);
}

TEST_CASE("probability formatting") {
  CHECK(io::format_probability(0.25) == "0.25");
  CHECK(io::format_probability(0.1) == "0.1");
  CHECK(std::stod(io::format_probability(1.0 / 3.0)) == 1.0 / 3.0);
}
