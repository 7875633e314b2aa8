#include "kantab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "kantab/error.hpp"

namespace kantab {

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) fail(ErrorKind::InvalidArgument, "alphabet must not be empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) fail(ErrorKind::InvalidArgument, "alphabet symbol names must be nonempty");
    if (!seen.insert(n).second)
      fail(ErrorKind::InvalidArgument, "duplicate alphabet symbol '" + n + "'");
  }
}

Alphabet Alphabet::numeric(std::size_t size) {
  std::vector<std::string> names;
  names.reserve(size);
  for (std::size_t i = 0; i < size; ++i) names.push_back(std::to_string(i));
  return Alphabet(std::move(names));
}

Symbol Alphabet::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    fail(ErrorKind::InvalidArgument, "unknown symbol '" + std::string(name) + "'");
  return static_cast<Symbol>(it - names_.begin());
}

namespace {

bool single_char_names(const Alphabet& alphabet) {
  return std::all_of(alphabet.names().begin(), alphabet.names().end(),
                     [](const std::string& n) { return n.size() == 1 && n != "."; });
}

}  // namespace

std::string format_word(const Alphabet& alphabet, std::span<const Symbol> word) {
  const bool compact = single_char_names(alphabet);
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!compact && i > 0) out += '.';
    out += alphabet.name(word[i]);
  }
  return out;
}

Word parse_word(const Alphabet& alphabet, std::string_view text) {
  Word w;
  if (text.empty()) return w;
  if (single_char_names(alphabet)) {
    for (char c : text) w.push_back(alphabet.index_of(std::string_view(&c, 1)));
    return w;
  }
  std::size_t start = 0;
  while (true) {
    auto dot = text.find('.', start);
    w.push_back(alphabet.index_of(text.substr(start, dot - start)));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return w;
}

std::vector<ChainViolation> validate_chain(const LabeledMarkovChain& chain) {
  std::vector<ChainViolation> out;
  const std::size_t n = chain.n_states();
  if (n == 0) {
    out.push_back({"shape", 0, 0.0, "chain has no states"});
    return out;
  }
  if (chain.transition.size() != n || chain.initial.size() != n) {
    std::ostringstream msg;
    msg << "expected " << n << " states, transition is " << chain.transition.size() << "x"
        << chain.transition.size() << " and initial has " << chain.initial.size() << " entries";
    out.push_back({"shape", 0, 0.0, msg.str()});
    return out;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!chain.alphabet.contains(chain.labels[s])) {
      out.push_back({"labels", s, 0.0,
                     "state " + std::to_string(s) + " has label index " +
                         std::to_string(chain.labels[s]) + " outside the alphabet"});
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    bool negative = false;
    for (double p : chain.transition.row(s)) {
      sum += p;
      negative = negative || p < 0.0 || !std::isfinite(p);
    }
    if (negative) {
      out.push_back({"transition", s, 0.0,
                     "row " + std::to_string(s) + " has a negative or non-finite entry"});
    }
    const double residual = std::abs(1.0 - sum);
    if (!(residual <= kStochasticTolerance)) {
      std::ostringstream msg;
      msg << "row " << s << " sums to " << sum << " (residual " << residual << ")";
      out.push_back({"transition", s, residual, msg.str()});
    }
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double p = chain.initial[s];
    sum += p;
    if (p < 0.0 || !std::isfinite(p)) {
      std::ostringstream msg;
      msg << "initial measure of state " << s << " is " << p;
      out.push_back({"initial", s, std::isfinite(p) ? -p : 0.0, msg.str()});
    }
  }
  const double residual = std::abs(1.0 - sum);
  if (!(residual <= kStochasticTolerance)) {
    std::ostringstream msg;
    msg << "initial measure sums to " << sum << " (residual " << residual << ")";
    out.push_back({"initial", n, residual, msg.str()});
  }
  return out;
}

void require_valid(const LabeledMarkovChain& chain) {
  auto report = validate_chain(chain);
  if (report.empty()) return;
  std::string msg = "invalid Markov chain:";
  for (const auto& v : report) msg += "\n  " + v.field + ": " + v.message;
  fail(ErrorKind::Validation, msg);
}

ForwardState initial_forward(const LabeledMarkovChain& chain, Symbol a) {
  if (!chain.alphabet.contains(a))
    fail(ErrorKind::InvalidArgument, "symbol index " + std::to_string(a) + " outside the alphabet");
  ForwardState fs;
  fs.alpha.assign(chain.n_states(), 0.0);
  for (std::size_t s = 0; s < chain.n_states(); ++s) {
    if (chain.labels[s] == a) fs.alpha[s] = chain.initial[s];
  }
  fs.prefix_prob = std::accumulate(fs.alpha.begin(), fs.alpha.end(), 0.0);
  return fs;
}

ForwardState extend_prefix(const LabeledMarkovChain& chain, const ForwardState& fs, Symbol a) {
  if (!chain.alphabet.contains(a))
    fail(ErrorKind::InvalidArgument, "symbol index " + std::to_string(a) + " outside the alphabet");
  const std::size_t n = chain.n_states();
  ForwardState next;
  next.alpha.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double mass = fs.alpha[s];
    if (mass == 0.0) continue;
    auto row = chain.transition.row(s);
    for (std::size_t t = 0; t < n; ++t) {
      if (chain.labels[t] == a) next.alpha[t] += mass * row[t];
    }
  }
  next.prefix_prob = std::accumulate(next.alpha.begin(), next.alpha.end(), 0.0);
  return next;
}

double word_probability(const LabeledMarkovChain& chain, std::span<const Symbol> w) {
  if (w.empty())
    fail(ErrorKind::InvalidArgument, "word_probability is undefined for the empty word");
  ForwardState fs = initial_forward(chain, w[0]);
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (fs.prefix_prob == 0.0) return 0.0;
    fs = extend_prefix(chain, fs, w[i]);
  }
  return fs.prefix_prob;
}

}  // namespace kantab
