#include "kantab/refine.hpp"

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "kantab/error.hpp"
#include "kantab/kantor.hpp"

namespace kantab {

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Deterministic:
      return "deterministic";
    case StopReason::BudgetExhausted:
      return "budget-exhausted";
  }
  return "?";
}

namespace {

constexpr double kExactDeterminismBand = 1e-9;
constexpr double kStandardErrors = 3.0;

bool entry_deterministic(double p, const Abstraction& abs, std::size_t row) {
  const double gap = std::min(p, 1.0 - p);
  if (abs.provenance.kind == Provenance::Kind::Exact) return gap <= kExactDeterminismBand;
  const double n_row = abs.measures[row] * static_cast<double>(abs.provenance.samples);
  if (n_row <= 0.0) return true;
  const double se = std::sqrt(std::max(0.0, p * (1.0 - p)) / n_row);
  return gap <= kStandardErrors * se;
}

std::string band_description(const Provenance& prov) {
  if (prov.kind == Provenance::Kind::Exact) return "exact: |P - {0,1}| <= 1e-9";
  std::ostringstream s;
  s << "sampled (" << prov.samples << " samples, seed " << prov.seed
    << "): |P - {0,1}| <= 3 binomial standard errors";
  return s.str();
}

}  // namespace

bool is_deterministic(const Abstraction& abs) {
  const auto& P = abs.chain.transition;
  for (std::size_t i = 0; i < P.size(); ++i)
    for (std::size_t j = 0; j < P.size(); ++j)
      if (!entry_deterministic(P(i, j), abs, i)) return false;
  return true;
}

std::unique_ptr<RegionMeasureOracle> make_oracle(const DynamicalSystem& sys,
                                                 const RefinementConfig& config) {
  if (config.mode == MeasureMode::Exact) return std::make_unique<ExactMeasureOracle>(sys);
  return std::make_unique<SampledMeasureOracle>(sys, config.samples, config.seed);
}

RefinementResult refine(const DynamicalSystem& sys, const RefinementConfig& config) {
  auto oracle = make_oracle(sys, config);
  return refine(sys, config, *oracle);
}

RefinementResult refine(const DynamicalSystem& sys, const RefinementConfig& config,
                        const RegionMeasureOracle& measures) {
  const int horizon = horizon_for_accuracy(config.epsilon);
  RefinementTrace trace;
  trace.epsilon = config.epsilon;
  trace.horizon = horizon;
  trace.determinism_band = band_description(measures.provenance());

  const std::size_t k_symbols = sys.alphabet().size();
  Abstraction current =
      build_abstraction(sys, AdaptivePartition::initial(sys.alphabet()), measures);
  std::optional<std::size_t> budget = config.max_iterations;

  for (std::size_t iteration = 0;; ++iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.abstraction = current;
    rec.deterministic = is_deterministic(current);
    if (rec.deterministic || (budget && *budget == 0)) {
      trace.stop = rec.deterministic ? StopReason::Deterministic : StopReason::BudgetExhausted;
      trace.iterations.push_back(std::move(rec));
      break;
    }

    std::optional<Abstraction> best;
    for (std::size_t i = 0; i < current.partition.size(); ++i) {
      const AdaptivePartition split = current.partition.split(i, k_symbols);
      Abstraction refined;
      try {
        refined = build_abstraction(sys, split, measures);
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "iteration " << iteration << ", splitting "
            << format_word(sys.alphabet(), current.partition.words()[i]) << ": " << e.what();
        throw Error(e.kind(), msg.str());
      }
      const double d = chain_metric(current.chain, refined.chain, config.epsilon).value;
      rec.candidates.push_back({current.partition.words()[i], refined.partition, d});
      if (!rec.chosen || d > rec.candidates[*rec.chosen].distance) {
        rec.chosen = i;
        best = std::move(refined);
      }
    }
    trace.iterations.push_back(std::move(rec));
    current = std::move(*best);
    if (budget) --*budget;
  }
  return {current, std::move(trace)};
}

std::vector<Word> supported_words(const LabeledMarkovChain& chain, std::size_t n) {
  constexpr std::size_t kSupportGuard = 1'000'000;
  std::vector<Word> out;
  if (n == 0) return out;
  struct Frame {
    Word prefix;
    ForwardState fwd;
  };
  std::vector<Frame> stack;
  const auto k = static_cast<Symbol>(chain.alphabet.size());
  for (Symbol a = k; a-- > 0;) {
    ForwardState f = initial_forward(chain, a);
    if (f.prefix_prob > 0.0) stack.push_back({{a}, std::move(f)});
  }
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.prefix.size() == n) {
      out.push_back(std::move(f.prefix));
      if (out.size() > kSupportGuard) fail(ErrorKind::Guard, "word support exceeds 10^6 words");
      continue;
    }
    for (Symbol a = k; a-- > 0;) {
      ForwardState next = extend_prefix(chain, f.fwd, a);
      if (next.prefix_prob <= 0.0) continue;
      Word w = f.prefix;
      w.push_back(a);
      stack.push_back({std::move(w), std::move(next)});
    }
  }
  return out;
}

BehaviorReport behavior_equivalence_check(const DynamicalSystem& sys, const Abstraction& abs,
                                          std::size_t horizon, std::size_t samples,
                                          std::uint64_t seed) {
  BehaviorReport report;
  report.horizon = horizon;
  report.samples = samples;
  std::set<Word> observed;
  UniformSampler sampler(sys.space(), seed);
  std::vector<double> x(sys.dimension());
  for (std::size_t i = 0; i < samples; ++i) {
    sampler.draw(x);
    observed.insert(sys.output_word(x, horizon));
  }
  const auto support_list = supported_words(abs.chain, horizon);
  const std::set<Word> support(support_list.begin(), support_list.end());
  for (const auto& w : observed)
    if (!support.count(w)) report.observed_not_supported.push_back(w);
  for (const auto& w : support)
    if (!observed.count(w)) report.supported_not_observed.push_back(w);
  report.observed_words = observed.size();
  report.supported_words = support.size();
  return report;
}

std::string format_trace_table(const DynamicalSystem& sys, const RefinementTrace& trace) {
  std::ostringstream out;
  out << "# epsilon " << trace.epsilon << " (horizon " << trace.horizon << "), "
      << trace.determinism_band << "\n";
  out << std::left << std::setw(6) << "k" << std::setw(40) << "W" << std::setw(14) << "d"
      << "deterministic\n";
  for (const auto& rec : trace.iterations) {
    std::string words = "{";
    const auto& ws = rec.abstraction.partition.words();
    for (std::size_t i = 0; i < ws.size(); ++i) {
      if (i) words += ", ";
      words += format_word(sys.alphabet(), ws[i]);
      if (rec.chosen && *rec.chosen == i) words += "*";
    }
    words += "}";
    std::ostringstream d;
    if (rec.chosen) {
      d << std::setprecision(6) << rec.candidates[*rec.chosen].distance;
    } else {
      d << "-";
    }
    out << std::setw(6) << ("k=" + std::to_string(rec.iteration)) << std::setw(40) << words
        << std::setw(14) << d.str() << (rec.deterministic ? "yes" : "no") << "\n";
  }
  out << "# stop: " << to_string(trace.stop) << "\n";
  return out.str();
}

}  // namespace kantab
