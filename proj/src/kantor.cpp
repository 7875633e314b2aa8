#include "kantab/kantor.hpp"

#include <algorithm>
#include <cmath>

#include "kantab/error.hpp"

namespace kantab {

double cantor_distance(std::span<const Symbol> w1, std::span<const Symbol> w2,
                       CantorParams params) {
  if (w1.size() != w2.size())
    fail(ErrorKind::InvalidArgument, "cantor_distance needs words of equal length");
  if (w1.empty()) fail(ErrorKind::InvalidArgument, "cantor_distance needs nonempty words");
  for (std::size_t i = 0; i < w1.size(); ++i) {
    if (w1[i] != w2[i]) return std::pow(params.base, static_cast<double>(i + 1));
  }
  return 0.0;
}

namespace {

struct Node {
  ForwardState fwd1;
  ForwardState fwd2;
  double mass;
  int depth;
};

struct Traversal {
  double total = 0.0;
  std::vector<double> levels;
  std::size_t nodes = 0;
};

void check_inputs(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2, int n,
                  CantorParams params) {
  if (!(c1.alphabet == c2.alphabet))
    fail(ErrorKind::InvalidArgument, "chains are defined over different alphabets");
  if (n < 1) fail(ErrorKind::InvalidArgument, "horizon must be at least 1");
  if (!(params.base > 0.0 && params.base < 1.0))
    fail(ErrorKind::InvalidArgument, "Cantor base must lie in (0, 1)");
}

// Depth-first over the prefix tree. The stack holds unexpanded nodes; children
// are pushed in reverse so they are popped in alphabet order, which fixes the
// floating-point summation order.
Traversal traverse(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2, int n,
                   CantorParams params) {
  check_inputs(c1, c2, n, params);
  const std::size_t k_symbols = c1.alphabet.size();
  Traversal out;
  out.levels.assign(static_cast<std::size_t>(n), 0.0);

  std::vector<Node> stack;
  std::vector<Node> children;
  children.reserve(k_symbols);

  // The virtual root (empty word, mass 1) is expanded inline because p^0 has
  // no forward vector.
  auto expand = [&](double mass, int depth, auto&& make_child) {
    ++out.nodes;
    children.clear();
    double child_sum = 0.0;
    for (Symbol a = 0; a < k_symbols; ++a) {
      Node child = make_child(a);
      child.mass = std::min(child.fwd1.prefix_prob, child.fwd2.prefix_prob);
      child.depth = depth + 1;
      child_sum += child.mass;
      children.push_back(std::move(child));
    }
    const double weight =
        std::pow(params.base, depth) - std::pow(params.base, depth + 1);
    // Nonnegative in exact arithmetic; drop rounding noise of the opposite sign.
    const double res = weight * std::max(0.0, mass - child_sum);
    out.levels[static_cast<std::size_t>(depth)] += res;
    out.total += res;
    if (depth + 1 == n) return;
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      if (it->mass > kZeroMass) stack.push_back(std::move(*it));
    }
  };

  expand(1.0, 0, [&](Symbol a) {
    return Node{initial_forward(c1, a), initial_forward(c2, a), 0.0, 0};
  });
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    expand(node.mass, node.depth, [&](Symbol a) {
      return Node{extend_prefix(c1, node.fwd1, a), extend_prefix(c2, node.fwd2, a), 0.0, 0};
    });
  }
  return out;
}

}  // namespace

MetricResult kant_metric(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2, int n,
                         CantorParams params) {
  Traversal t = traverse(c1, c2, n, params);
  MetricResult r;
  r.value = t.total;
  r.horizon = n;
  r.upper_bound = t.total + std::pow(params.base, n);
  r.nodes_expanded = t.nodes;
  return r;
}

std::vector<double> level_increments(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2,
                                     int n, CantorParams params) {
  return traverse(c1, c2, n, params).levels;
}

int horizon_for_accuracy(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1)");
  // epsilon = m * 2^e with m in [1/2, 1), so floor(log2 epsilon) = e - 1.
  int e = 0;
  std::frexp(epsilon, &e);
  return 1 - e;
}

MetricResult chain_metric(const LabeledMarkovChain& c1, const LabeledMarkovChain& c2,
                          double epsilon) {
  return kant_metric(c1, c2, horizon_for_accuracy(epsilon));
}

}  // namespace kantab
