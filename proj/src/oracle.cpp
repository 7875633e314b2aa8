#include "kantab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kantab/error.hpp"

namespace kantab {

std::size_t word_count(std::size_t alphabet_size, int n) {
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) {
    if (count > std::numeric_limits<std::size_t>::max() / alphabet_size)
      return std::numeric_limits<std::size_t>::max();
    count *= alphabet_size;
  }
  return count;
}

Word WordDistribution::word(std::size_t index) const {
  const std::size_t k = alphabet.size();
  Word w(static_cast<std::size_t>(horizon));
  for (int pos = horizon - 1; pos >= 0; --pos) {
    w[static_cast<std::size_t>(pos)] = static_cast<Symbol>(index % k);
    index /= k;
  }
  return w;
}

std::size_t WordDistribution::index_of(std::span<const Symbol> w) const {
  std::size_t index = 0;
  for (Symbol s : w) index = index * alphabet.size() + s;
  return index;
}

WordDistribution enumerate_distribution(const LabeledMarkovChain& chain, int n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "horizon must be at least 1");
  const std::size_t k = chain.alphabet.size();
  const std::size_t total = word_count(k, n);
  if (total > kEnumerationGuard) {
    std::ostringstream msg;
    msg << "enumerating " << k << "^" << n << " words exceeds the guard of " << kEnumerationGuard
        << "; use kant_metric for large horizons";
    fail(ErrorKind::Guard, msg.str());
  }
  WordDistribution dist{chain.alphabet, n, std::vector<double>(total, 0.0)};

  // Depth-first over prefixes so each word costs one forward extension.
  struct Frame {
    ForwardState fwd;
    std::size_t index;  // lexicographic index of the prefix
    int depth;
  };
  std::vector<Frame> stack;
  for (Symbol a = static_cast<Symbol>(k); a-- > 0;) {
    stack.push_back({initial_forward(chain, a), a, 1});
  }
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.depth == n) {
      dist.probs[f.index] = f.fwd.prefix_prob;
      continue;
    }
    if (f.fwd.prefix_prob == 0.0) continue;
    for (Symbol a = static_cast<Symbol>(k); a-- > 0;) {
      stack.push_back({extend_prefix(chain, f.fwd, a), f.index * k + a, f.depth + 1});
    }
  }
  return dist;
}

WordDistribution marginalize_last(const WordDistribution& dist) {
  if (dist.horizon < 2) fail(ErrorKind::InvalidArgument, "cannot marginalize below horizon 1");
  const std::size_t k = dist.alphabet.size();
  WordDistribution out{dist.alphabet, dist.horizon - 1,
                       std::vector<double>(dist.size() / k, 0.0)};
  for (std::size_t i = 0; i < dist.size(); ++i) out.probs[i / k] += dist.probs[i];
  return out;
}

namespace {

// Cantor distance between the words at two lexicographic indices.
double index_distance(std::size_t i, std::size_t j, std::size_t k, int n, double base) {
  if (i == j) return 0.0;
  std::size_t scale = word_count(k, n - 1);
  for (int pos = 1; pos <= n; ++pos) {
    if (i / scale != j / scale) return std::pow(base, pos);
    i %= scale;
    j %= scale;
    scale /= k;
  }
  return 0.0;
}

constexpr double kMassEps = 1e-15;

}  // namespace

TransportResult exact_kantorovich(const WordDistribution& p, const WordDistribution& q,
                                  CantorParams params) {
  if (!(p.alphabet == q.alphabet) || p.horizon != q.horizon)
    fail(ErrorKind::InvalidArgument, "distributions differ in alphabet or horizon");
  const std::size_t n_words = p.size();
  if (n_words > kTransportGuard) {
    std::ostringstream msg;
    msg << "exact transport over " << n_words << " words exceeds the guard of "
        << kTransportGuard;
    fail(ErrorKind::Guard, msg.str());
  }
  double sum_p = 0.0, sum_q = 0.0;
  for (double v : p.probs) sum_p += v;
  for (double v : q.probs) sum_q += v;
  if (std::abs(sum_p - sum_q) > 1e-8) {
    std::ostringstream msg;
    msg << "marginal masses differ: " << sum_p << " vs " << sum_q;
    fail(ErrorKind::InvalidArgument, msg.str());
  }

  const std::size_t n = n_words;
  const std::size_t k = p.alphabet.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = index_distance(i, j, k, p.horizon, params.base);

  std::vector<double> supply = p.probs;
  std::vector<double> demand = q.probs;
  std::vector<double> flow(n * n, 0.0);

  // Nodes 0..n-1 are supply words, n..2n-1 demand words. Potentials keep the
  // reduced costs nonnegative so Dijkstra applies to the residual graph.
  const std::size_t v_count = 2 * n;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> potential(v_count, 0.0);
  std::vector<double> dist(v_count);
  std::vector<std::size_t> prev(v_count);
  std::vector<char> done(v_count);
  const std::size_t max_rounds = 4 * n * n + 16;

  for (std::size_t round = 0;; ++round) {
    if (round > max_rounds)
      fail(ErrorKind::OracleInconsistency, "transport solver failed to converge");
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    bool any_source = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (supply[i] > kMassEps) {
        dist[i] = 0.0;
        prev[i] = i;
        any_source = true;
      }
    }
    if (!any_source) break;

    std::size_t target = v_count;
    while (true) {
      std::size_t u = v_count;
      double best = inf;
      for (std::size_t v = 0; v < v_count; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == v_count) break;
      done[u] = 1;
      if (u >= n && demand[u - n] > kMassEps) {
        target = u;
        break;
      }
      if (u < n) {
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t v = n + j;
          if (done[v]) continue;
          const double rc = std::max(0.0, cost[u * n + j] + potential[u] - potential[v]);
          if (dist[u] + rc < dist[v]) {
            dist[v] = dist[u] + rc;
            prev[v] = u;
          }
        }
      } else {
        const std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (done[i] || flow[i * n + j] <= kMassEps) continue;
          const double rc = std::max(0.0, -cost[i * n + j] + potential[u] - potential[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            prev[i] = u;
          }
        }
      }
    }
    if (target == v_count) break;  // remaining supply is rounding residue

    const double d_target = dist[target];
    for (std::size_t v = 0; v < v_count; ++v) potential[v] += std::min(dist[v], d_target);

    // Bottleneck along the path target <- ... <- source.
    double delta = demand[target - n];
    std::size_t v = target;
    while (true) {
      const std::size_t u = prev[v];
      if (u == v) break;
      if (u >= n) delta = std::min(delta, flow[v * n + (u - n)]);  // reverse arc
      v = u;
    }
    delta = std::min(delta, supply[v]);
    const std::size_t source = v;

    v = target;
    while (true) {
      const std::size_t u = prev[v];
      if (u == v) break;
      if (u < n) {
        flow[u * n + (v - n)] += delta;
      } else {
        flow[v * n + (u - n)] -= delta;
      }
      v = u;
    }
    supply[source] -= delta;
    demand[target - n] -= delta;
  }

  TransportResult result;
  double value = 0.0;
  for (std::size_t idx = 0; idx < n * n; ++idx) {
    if (flow[idx] < 0.0) flow[idx] = 0.0;
    value += cost[idx] * flow[idx];
  }
  result.value = value;
  result.coupling = Coupling{p, q, std::move(flow)};
  return result;
}

double marginal_residual(const Coupling& coupling) {
  const std::size_t n = coupling.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += coupling(i, j);
      col += coupling(j, i);
    }
    worst = std::max({worst, std::abs(row - coupling.first.probs[i]),
                      std::abs(col - coupling.second.probs[i])});
  }
  return worst;
}

LemmaReport check_lemma_diagonal(const Coupling& coupling, double tol) {
  LemmaReport report;
  for (std::size_t i = 0; i < coupling.size(); ++i) {
    const double expected = std::min(coupling.first.probs[i], coupling.second.probs[i]);
    const double actual = coupling(i, i);
    if (std::abs(actual - expected) > tol) {
      std::ostringstream msg;
      msg << "word " << format_word(coupling.first.alphabet, coupling.first.word(i))
          << ": diagonal mass " << actual << " != min(p, q) = " << expected;
      report.violations.push_back(msg.str());
    }
  }
  return report;
}

LemmaReport check_lemma_blockflow(const Coupling& coupling, const WordDistribution& p_n,
                                  const WordDistribution& q_n, double tol) {
  if (p_n.horizon + 1 != coupling.first.horizon || q_n.horizon != p_n.horizon)
    fail(ErrorKind::InvalidArgument, "block-flow check needs prefixes one symbol shorter");
  const std::size_t k = coupling.first.alphabet.size();
  const std::size_t n = coupling.size();
  std::vector<double> outgoing(p_n.size(), 0.0);
  std::vector<double> incoming(p_n.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double mass = coupling(i, j);
      if (mass == 0.0 || i / k == j / k) continue;
      outgoing[i / k] += mass;
      incoming[j / k] += mass;
    }
  }
  LemmaReport report;
  for (std::size_t b = 0; b < p_n.size(); ++b) {
    const double surplus = p_n.probs[b] - q_n.probs[b];
    const double want_out = surplus > 0.0 ? surplus : 0.0;
    const double want_in = surplus > 0.0 ? 0.0 : -surplus;
    if (std::abs(outgoing[b] - want_out) > tol || std::abs(incoming[b] - want_in) > tol) {
      std::ostringstream msg;
      msg << "block " << format_word(p_n.alphabet, p_n.word(b)) << ": outgoing " << outgoing[b]
          << " (expected " << want_out << "), incoming " << incoming[b] << " (expected "
          << want_in << ")";
      report.violations.push_back(msg.str());
    }
  }
  return report;
}

double prefix_min_increment(const WordDistribution& p_n, const WordDistribution& q_n,
                            const WordDistribution& p_next, const WordDistribution& q_next) {
  if (p_next.horizon != p_n.horizon + 1 || q_next.horizon != p_next.horizon ||
      q_n.horizon != p_n.horizon)
    fail(ErrorKind::InvalidArgument, "distributions must be at horizons n and n+1");
  const std::size_t k = p_n.alphabet.size();
  double sum = 0.0;
  for (std::size_t w = 0; w < p_n.size(); ++w) {
    double children = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      children += std::min(p_next.probs[w * k + a], q_next.probs[w * k + a]);
    sum += std::min(p_n.probs[w], q_n.probs[w]) - children;
  }
  return std::ldexp(sum, -(p_n.horizon + 1));
}

}  // namespace kantab
