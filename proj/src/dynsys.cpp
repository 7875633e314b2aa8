#include "kantab/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kantab/error.hpp"

namespace kantab {

void AffineMap::apply(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = dimension();
  for (std::size_t r = 0; r < d; ++r) {
    double v = offset[r];
    for (std::size_t c = 0; c < d; ++c) v += matrix[r * d + c] * x[c];
    out[r] = v;
  }
}

bool AffineMap::is_diagonal() const noexcept {
  const std::size_t d = dimension();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (r != c && matrix[r * d + c] != 0.0) return false;
  return true;
}

AffineMap AffineMap::identity(std::size_t dim) {
  return diagonal(std::vector<double>(dim, 1.0), std::vector<double>(dim, 0.0));
}

AffineMap AffineMap::diagonal(std::vector<double> scale, std::vector<double> offset) {
  const std::size_t d = scale.size();
  AffineMap m;
  m.matrix.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m.matrix[i * d + i] = scale[i];
  m.offset = std::move(offset);
  return m;
}

DynamicalSystem::DynamicalSystem(std::string name, Box space, Alphabet alphabet,
                                 std::vector<Region> regions,
                                 std::optional<DefaultRule> default_rule)
    : name_(std::move(name)),
      space_(std::move(space)),
      alphabet_(std::move(alphabet)),
      regions_(std::move(regions)) {
  if (space_.dimension() == 0 || space_.volume() <= 0.0)
    fail(ErrorKind::Validation, "state space must be a box of positive volume");
  const std::size_t d = space_.dimension();
  for (const auto& r : regions_) {
    if (r.area.dimension() != d || r.map.dimension() != d || r.map.matrix.size() != d * d)
      fail(ErrorKind::Validation, "region '" + r.name + "' has the wrong dimension");
    if (!alphabet_.contains(r.label))
      fail(ErrorKind::Validation, "region '" + r.name + "' has an invalid label");
  }
  if (default_rule) {
    if (default_rule->map.dimension() != d || default_rule->map.matrix.size() != d * d)
      fail(ErrorKind::Validation, "default map has the wrong dimension");
    if (!alphabet_.contains(default_rule->label))
      fail(ErrorKind::Validation, "default rule has an invalid label");
    BoxSet rest(space_);
    for (const auto& r : regions_) rest = rest.subtract(r.area);
    std::size_t i = 0;
    for (const auto& b : rest.boxes()) {
      if (b.volume() == 0.0) continue;
      regions_.push_back(
          {"default#" + std::to_string(i++), b, default_rule->map, default_rule->label});
    }
  }
  auto issues = validate_system(*this);
  if (!issues.empty()) {
    std::string msg = "invalid system '" + name_ + "':";
    for (const auto& s : issues) msg += "\n  " + s;
    fail(ErrorKind::Validation, msg);
  }
}

std::size_t DynamicalSystem::locate(std::span<const double> x) const {
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (regions_[i].area.contains(x)) return i;
  std::ostringstream msg;
  msg << "point (";
  for (std::size_t k = 0; k < x.size(); ++k) msg << (k ? ", " : "") << x[k];
  msg << ") lies in no region of '" << name_ << "'";
  fail(ErrorKind::Covering, msg.str());
}

Symbol DynamicalSystem::output(std::span<const double> x) const {
  return regions_[locate(x)].label;
}

void DynamicalSystem::step(std::span<const double> x, std::span<double> out) const {
  regions_[locate(x)].map.apply(x, out);
}

std::vector<double> DynamicalSystem::step(std::span<const double> x) const {
  std::vector<double> out(x.size());
  step(x, out);
  return out;
}

Word DynamicalSystem::output_word(std::span<const double> x, std::size_t n) const {
  Word w;
  w.reserve(n);
  std::vector<double> cur(x.begin(), x.end()), next(x.size());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t r = locate(cur);
    w.push_back(regions_[r].label);
    if (k + 1 < n) {
      regions_[r].map.apply(cur, next);
      std::swap(cur, next);
    }
  }
  return w;
}

bool DynamicalSystem::has_diagonal_maps() const noexcept {
  return std::all_of(regions_.begin(), regions_.end(),
                     [](const Region& r) { return r.map.is_diagonal(); });
}

std::vector<DiagonalPiece> DynamicalSystem::diagonal_pieces() const {
  std::vector<DiagonalPiece> pieces;
  const std::size_t d = dimension();
  for (const auto& r : regions_) {
    if (!r.map.is_diagonal())
      fail(ErrorKind::InvalidArgument,
           "region '" + r.name + "' has a non-diagonal map; exact measures are unavailable");
    std::vector<double> scale(d);
    for (std::size_t i = 0; i < d; ++i) scale[i] = r.map.matrix[i * d + i];
    pieces.push_back({r.area, std::move(scale), r.map.offset});
  }
  return pieces;
}

BoxSet DynamicalSystem::label_set(Symbol a) const {
  BoxSet out;
  for (const auto& r : regions_)
    if (r.label == a) out.add_disjoint(r.area);
  return out;
}

std::vector<std::string> validate_system(const DynamicalSystem& sys) {
  std::vector<std::string> issues;
  const auto& regions = sys.regions();
  const Box& space = sys.space();
  double covered = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Box inside = regions[i].area.intersect(space);
    if (inside.volume() != regions[i].area.volume())
      issues.push_back("region '" + regions[i].name + "' extends outside the space");
    covered += regions[i].area.volume();
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (!regions[i].area.intersect(regions[j].area).empty())
        issues.push_back("regions '" + regions[i].name + "' and '" + regions[j].name +
                         "' overlap");
    }
  }
  const double total = space.volume();
  if (std::abs(covered - total) > 1e-12 * total) {
    std::ostringstream msg;
    msg << "regions cover volume " << covered << " of " << total;
    issues.push_back(msg.str());
  }
  // Affine images of a box are hulls of the corner images.
  const std::size_t d = sys.dimension();
  std::vector<double> corner(d), image(d);
  const Box closed_space = [&] {
    Box b = space;
    for (auto& i : b.dims) i.lo_closed = i.hi_closed = true;
    return b;
  }();
  for (const auto& r : regions) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      for (std::size_t k = 0; k < d; ++k)
        corner[k] = (mask >> k) & 1 ? r.area.dims[k].hi : r.area.dims[k].lo;
      r.map.apply(corner, image);
      if (!closed_space.contains(image)) {
        issues.push_back("map of region '" + r.name + "' leaves the space");
        break;
      }
    }
  }
  return issues;
}

struct UniformSampler::Impl {
  std::mt19937_64 rng;
  std::vector<std::uniform_real_distribution<double>> coords;
};

UniformSampler::UniformSampler(const Box& space, std::uint64_t seed)
    : impl_(std::make_shared<Impl>()) {
  impl_->rng.seed(seed);
  for (const auto& i : space.dims) impl_->coords.emplace_back(i.lo, i.hi);
}

void UniformSampler::draw(std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = impl_->coords[k](impl_->rng);
}

std::size_t count_escapes(const DynamicalSystem& sys, std::size_t samples, std::uint64_t seed) {
  UniformSampler sampler(sys.space(), seed);
  std::vector<double> x(sys.dimension()), y(sys.dimension());
  std::size_t escapes = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    sampler.draw(x);
    sys.step(x, y);
    if (!sys.space().contains(y)) ++escapes;
  }
  return escapes;
}

bool class_membership(const DynamicalSystem& sys, std::span<const double> x,
                      std::span<const Symbol> w) {
  if (w.empty()) return true;
  std::vector<double> cur(x.begin(), x.end()), next(x.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const std::size_t r = sys.locate(cur);
    if (sys.regions()[r].label != w[k]) return false;
    if (k + 1 < w.size()) {
      sys.regions()[r].map.apply(cur, next);
      std::swap(cur, next);
    }
  }
  return true;
}

DynamicalSystem benchmark_system() {
  const std::vector<double> lo{0.0, 0.0}, hi{2.0, 1.0};
  Box space = Box::closed(lo, hi);
  auto rect = [&](double x0, double x1, double y0, double y1) {
    const std::vector<double> l{x0, y0}, u{x1, y1};
    return Box::half_open(l, u, &space);
  };
  std::vector<Region> regions{
      {"P1", rect(1.0, 2.0, 0.0, 1.0), AffineMap::identity(2), 0},
      {"P2", rect(0.0, 1.0, 0.75, 1.0), AffineMap::diagonal({1.0, 1.0}, {0.0, -0.25}), 1},
      {"P3", rect(0.0, 1.0, 0.5, 0.75), AffineMap::diagonal({1.0, 2.0}, {0.0, -1.0}), 1},
      {"P4", rect(0.0, 1.0, 0.0, 0.25), AffineMap::identity(2), 1},
      {"P5", rect(0.0, 1.0, 0.25, 0.5), AffineMap::diagonal({1.0, 4.0}, {1.0, -1.0}), 1},
  };
  return DynamicalSystem("benchmark", std::move(space), Alphabet::numeric(2), std::move(regions));
}

DynamicalSystem fixed_point_system() {
  const std::vector<double> lo{0.0}, hi{1.0};
  Box space = Box::closed(lo, hi);
  std::vector<Region> regions{{"X", space, AffineMap::identity(1), 0}};
  return DynamicalSystem("fixed-point", std::move(space), Alphabet::numeric(1),
                         std::move(regions));
}

ExactMeasureOracle::ExactMeasureOracle(DynamicalSystem sys)
    : sys_(std::move(sys)), pieces_(sys_.diagonal_pieces()), space_volume_(sys_.space().volume()) {}

BoxSet ExactMeasureOracle::class_set(const Word& w) const {
  if (w.empty()) return BoxSet(sys_.space());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(w); it != cache_.end()) return it->second;
  }
  for (Symbol s : w)
    if (!sys_.alphabet().contains(s)) fail(ErrorKind::InvalidArgument, "word symbol out of range");
  // [a w'] = H^{-1}(a) ∩ F^{-1}([w'])
  const Word tail(w.begin() + 1, w.end());
  BoxSet result = sys_.label_set(w.front());
  if (!tail.empty()) result = result.intersect(preimage(pieces_, class_set(tail)));
  std::lock_guard lock(mutex_);
  return cache_.emplace(w, std::move(result)).first->second;
}

double ExactMeasureOracle::measure(const Word& w) const {
  return class_set(w).volume() / space_volume_;
}

SampledMeasureOracle::SampledMeasureOracle(DynamicalSystem sys, std::size_t samples,
                                           std::uint64_t seed)
    : sys_(std::move(sys)), samples_(samples), seed_(seed) {
  if (samples_ == 0) fail(ErrorKind::InvalidArgument, "sample count must be positive");
  const std::size_t d = sys_.dimension();
  states_.resize(samples_ * d);
  UniformSampler sampler(sys_.space(), seed_);
  for (std::size_t i = 0; i < samples_; ++i) sampler.draw({states_.data() + i * d, d});
}

void SampledMeasureOracle::extend_to(std::size_t depth) const {
  const std::size_t d = sys_.dimension();
  std::vector<double> next(d);
  while (outputs_.size() < depth) {
    const bool advance = !outputs_.empty();
    std::vector<Symbol> level(samples_);
    for (std::size_t i = 0; i < samples_; ++i) {
      std::span<double> x{states_.data() + i * d, d};
      if (advance) {
        sys_.step(x, next);
        std::copy(next.begin(), next.end(), x.begin());
      }
      level[i] = sys_.output(x);
    }
    outputs_.push_back(std::move(level));
  }
}

std::size_t SampledMeasureOracle::hits(const Word& w) const {
  if (w.empty()) return samples_;
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(w); it != cache_.end()) return it->second;
  extend_to(w.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < samples_; ++i) {
    bool match = true;
    for (std::size_t k = 0; k < w.size() && match; ++k) match = outputs_[k][i] == w[k];
    count += match;
  }
  cache_.emplace(w, count);
  return count;
}

double SampledMeasureOracle::measure(const Word& w) const {
  return static_cast<double>(hits(w)) / static_cast<double>(samples_);
}

Provenance SampledMeasureOracle::provenance() const {
  return {Provenance::Kind::Sampled, samples_, seed_};
}

AdaptivePartition::AdaptivePartition(std::vector<Word> words) : words_(std::move(words)) {
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
}

AdaptivePartition AdaptivePartition::initial(const Alphabet& alphabet) {
  std::vector<Word> words;
  for (Symbol a = 0; a < alphabet.size(); ++a) words.push_back({a});
  return AdaptivePartition(std::move(words));
}

bool AdaptivePartition::is_prefix_free() const {
  // In lexicographic order a prefix sorts immediately before some extension
  // of itself, so adjacent checks suffice.
  for (std::size_t i = 0; i + 1 < words_.size(); ++i) {
    const Word& a = words_[i];
    const Word& b = words_[i + 1];
    if (a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  return true;
}

std::size_t AdaptivePartition::max_length() const {
  std::size_t m = 0;
  for (const auto& w : words_) m = std::max(m, w.size());
  return m;
}

std::optional<std::size_t> AdaptivePartition::match(std::span<const Symbol> trajectory) const {
  // The candidate prefix is the largest word not exceeding the trajectory.
  auto it = std::upper_bound(words_.begin(), words_.end(), trajectory,
                             [](std::span<const Symbol> t, const Word& w) {
                               return std::lexicographical_compare(t.begin(), t.end(), w.begin(),
                                                                   w.end());
                             });
  if (it == words_.begin()) return std::nullopt;
  --it;
  if (it->size() <= trajectory.size() && std::equal(it->begin(), it->end(), trajectory.begin()))
    return static_cast<std::size_t>(it - words_.begin());
  return std::nullopt;
}

std::size_t AdaptivePartition::locate(const DynamicalSystem& sys,
                                      std::span<const double> x) const {
  const Word traj = sys.output_word(x, max_length());
  if (auto m = match(traj)) return *m;
  fail(ErrorKind::Covering,
       "trajectory " + format_word(sys.alphabet(), traj) + " matches no partition word");
}

AdaptivePartition AdaptivePartition::split(std::size_t i, std::size_t alphabet_size) const {
  std::vector<Word> words = words_;
  Word parent = words.at(i);
  words.erase(words.begin() + static_cast<std::ptrdiff_t>(i));
  for (Symbol a = 0; a < alphabet_size; ++a) {
    Word child = parent;
    child.push_back(a);
    words.push_back(std::move(child));
  }
  return AdaptivePartition(std::move(words));
}

std::size_t covering_violations(const DynamicalSystem& sys, const AdaptivePartition& partition,
                                std::size_t samples, std::uint64_t seed) {
  UniformSampler sampler(sys.space(), seed);
  std::vector<double> x(sys.dimension());
  const std::size_t depth = partition.max_length();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    sampler.draw(x);
    const Word traj = sys.output_word(x, depth);
    std::size_t matches = 0;
    for (const auto& w : partition.words())
      matches += std::equal(w.begin(), w.end(), traj.begin());
    bad += matches != 1;
  }
  return bad;
}

Abstraction build_abstraction(const DynamicalSystem& sys, const AdaptivePartition& partition,
                              const RegionMeasureOracle& measures) {
  if (!partition.is_prefix_free())
    fail(ErrorKind::InvalidArgument, "partition words must be prefix-free");
  const Alphabet& alphabet = sys.alphabet();
  const Provenance prov = measures.provenance();
  const double row_tol =
      prov.kind == Provenance::Kind::Exact ? kExactRowTolerance : kSampledRowTolerance;

  std::vector<Word> words;
  std::vector<double> mass;
  for (const auto& w : partition.words()) {
    const double m = measures.measure(w);
    if (m > 0.0) {
      words.push_back(w);
      mass.push_back(m);
    }
  }
  if (words.empty()) fail(ErrorKind::OracleInconsistency, "every partition word has measure 0");
  const std::size_t n = words.size();

  Abstraction abs;
  abs.partition = AdaptivePartition(words);
  abs.measures = mass;
  abs.provenance = prov;
  LabeledMarkovChain& chain = abs.chain;
  chain.alphabet = alphabet;
  chain.transition = Matrix(n);
  chain.labels.resize(n);
  chain.initial = mass;

  double mu_sum = 0.0;
  for (double m : mass) mu_sum += m;
  if (std::abs(mu_sum - 1.0) > row_tol) {
    std::ostringstream msg;
    msg << "partition classes cover measure " << mu_sum << " instead of 1";
    fail(ErrorKind::OracleInconsistency, msg.str());
  }
  for (double& m : chain.initial) m /= mu_sum;

  for (std::size_t i = 0; i < n; ++i) {
    const Word& w1 = words[i];
    chain.labels[i] = w1.front();
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const Word& w2 = words[j];
      const std::size_t k = std::min(w1.size() - 1, w2.size());
      if (!std::equal(w1.begin() + 1, w1.begin() + 1 + static_cast<std::ptrdiff_t>(k),
                      w2.begin()))
        continue;
      // [w1] ∩ [a1 w2] is whichever of the two words is longer.
      double num;
      if (w2.size() + 1 >= w1.size()) {
        Word shifted;
        shifted.reserve(w2.size() + 1);
        shifted.push_back(w1.front());
        shifted.insert(shifted.end(), w2.begin(), w2.end());
        num = measures.measure(shifted);
      } else {
        num = mass[i];
      }
      chain.transition(i, j) = num / mass[i];
      row_sum += chain.transition(i, j);
    }
    if (std::abs(row_sum - 1.0) > row_tol) {
      std::ostringstream msg;
      msg << "transition row of word " << format_word(alphabet, w1) << " sums to " << row_sum;
      fail(ErrorKind::OracleInconsistency, msg.str());
    }
    for (double& p : chain.transition.row(i)) p /= row_sum;
  }
  require_valid(chain);
  return abs;
}

}  // namespace kantab
