#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "pimpgp/expr.hpp"
#include "pimpgp/rng.hpp"

namespace pimpgp {

// Mutation regimes.  SubtreeMutation replaces a random subtree with a fresh
// ramped tree; NodeReplacementMutation redraws nodes in place; NoMutation
// passes chromosomes through untouched.
struct SubtreeMutation {
  int grow_min = 2;
  int grow_max = 7;
  friend bool operator==(const SubtreeMutation&, const SubtreeMutation&) = default;
};

struct NodeReplacementMutation {
  double per_node_prob = 0.05;
  friend bool operator==(const NodeReplacementMutation&, const NodeReplacementMutation&) = default;
};

struct NoMutation {
  friend bool operator==(const NoMutation&, const NoMutation&) = default;
};

using LeafMutation = std::variant<SubtreeMutation, NodeReplacementMutation, NoMutation>;

// One stage of a staged schedule: `strategy` is active for generations in
// [from_gen, to_gen).
struct HybridPhase {
  int from_gen = 0;
  int to_gen = 0;
  LeafMutation strategy;
  friend bool operator==(const HybridPhase&, const HybridPhase&) = default;
};

struct HybridMutation {
  std::vector<HybridPhase> phases;
  friend bool operator==(const HybridMutation&, const HybridMutation&) = default;
};

using MutationStrategy =
    std::variant<SubtreeMutation, NodeReplacementMutation, NoMutation, HybridMutation>;

// The schedule that starts with wide subtree growth and narrows to node
// replacement: [0,200) subtree(2,6), [200,400) subtree(2,4), [400,600)
// subtree(2,2), [600,total) node replacement at 5% per node.
inline HybridMutation staged_hybrid_schedule(int total_generations = 1500) {
  if (total_generations <= 600)
    throw std::invalid_argument("staged hybrid schedule needs more than 600 generations");
  return HybridMutation{{
      {0, 200, SubtreeMutation{2, 6}},
      {200, 400, SubtreeMutation{2, 4}},
      {400, 600, SubtreeMutation{2, 2}},
      {600, total_generations, NodeReplacementMutation{0.05}},
  }};
}

inline void validate_mutation(const LeafMutation& m) {
  if (const auto* s = std::get_if<SubtreeMutation>(&m)) {
    if (s->grow_min < 0 || s->grow_min > s->grow_max)
      throw std::invalid_argument("subtree mutation needs 0 <= grow_min <= grow_max");
  } else if (const auto* n = std::get_if<NodeReplacementMutation>(&m)) {
    if (!(n->per_node_prob >= 0.0 && n->per_node_prob <= 1.0))
      throw std::invalid_argument("node replacement probability must lie in [0,1]");
  }
}

// Hybrid phases must be contiguous, non-overlapping, and cover exactly
// [0, total_generations).
inline void validate_mutation(const MutationStrategy& m, int total_generations) {
  if (const auto* h = std::get_if<HybridMutation>(&m)) {
    if (h->phases.empty()) throw std::invalid_argument("hybrid schedule has no phases");
    int expect = 0;
    for (const HybridPhase& p : h->phases) {
      if (p.from_gen != expect)
        throw std::invalid_argument("hybrid schedule phases must be contiguous from generation 0");
      if (p.to_gen <= p.from_gen) throw std::invalid_argument("hybrid phase interval is empty");
      validate_mutation(p.strategy);
      expect = p.to_gen;
    }
    if (expect != total_generations)
      throw std::invalid_argument("hybrid schedule must cover all generations, ends at " +
                                  std::to_string(expect));
    return;
  }
  std::visit(
      [](const auto& leaf) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(leaf)>, HybridMutation>)
          validate_mutation(LeafMutation(leaf));
      },
      m);
}

// Active regime for a generation.  Non-hybrid strategies apply to every
// generation; hybrid resolves the unique covering phase.
inline LeafMutation strategy_for_generation(const MutationStrategy& m, int gen) {
  if (const auto* h = std::get_if<HybridMutation>(&m)) {
    for (const HybridPhase& p : h->phases)
      if (gen >= p.from_gen && gen < p.to_gen) return p.strategy;
    throw std::out_of_range("generation " + std::to_string(gen) +
                            " is outside every hybrid schedule interval");
  }
  LeafMutation out;
  std::visit(
      [&](const auto& leaf) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(leaf)>, HybridMutation>) out = leaf;
      },
      m);
  return out;
}

// Swaps the subtrees rooted at one uniformly chosen node per parent (root
// included).  Depth limits are deliberately not enforced here; the caller
// decides what to do with oversized children.
template <RandomSource R>
std::pair<ExprTree, ExprTree> subtree_crossover(const ExprTree& a, const ExprTree& b, R& rng) {
  const std::size_t ia = rng.uniform_index(a.size());
  const std::size_t ib = rng.uniform_index(b.size());
  const std::size_t a_begin = a.subtree_begin(ia), a_end = ia + 1;
  const std::size_t b_begin = b.subtree_begin(ib), b_end = ib + 1;

  std::vector<Node> c1;
  c1.reserve(a.size() - (a_end - a_begin) + (b_end - b_begin));
  c1.insert(c1.end(), a.nodes().begin(), a.nodes().begin() + static_cast<std::ptrdiff_t>(a_begin));
  c1.insert(c1.end(), b.nodes().begin() + static_cast<std::ptrdiff_t>(b_begin),
            b.nodes().begin() + static_cast<std::ptrdiff_t>(b_end));
  c1.insert(c1.end(), a.nodes().begin() + static_cast<std::ptrdiff_t>(a_end), a.nodes().end());

  std::vector<Node> c2;
  c2.reserve(b.size() - (b_end - b_begin) + (a_end - a_begin));
  c2.insert(c2.end(), b.nodes().begin(), b.nodes().begin() + static_cast<std::ptrdiff_t>(b_begin));
  c2.insert(c2.end(), a.nodes().begin() + static_cast<std::ptrdiff_t>(a_begin),
            a.nodes().begin() + static_cast<std::ptrdiff_t>(a_end));
  c2.insert(c2.end(), b.nodes().begin() + static_cast<std::ptrdiff_t>(b_end), b.nodes().end());

  return {ExprTree::from_postfix(std::move(c1)), ExprTree::from_postfix(std::move(c2))};
}

// Replaces the subtree at one uniformly chosen node (root included) with a
// fresh ramped tree: depth target uniform in [grow_min, grow_max], method a
// fair coin between Full and Grow.
template <RandomSource R>
ExprTree subtree_mutation(const ExprTree& t, int grow_min, int grow_max, const FunctionSet& fs,
                          R& rng) {
  const std::size_t at = rng.uniform_index(t.size());
  const ExprTree fresh = random_tree_ramped(grow_min, grow_max, fs, rng);
  const std::size_t begin = t.subtree_begin(at), end = at + 1;
  std::vector<Node> out;
  out.reserve(t.size() - (end - begin) + fresh.size());
  out.insert(out.end(), t.nodes().begin(), t.nodes().begin() + static_cast<std::ptrdiff_t>(begin));
  out.insert(out.end(), fresh.nodes().begin(), fresh.nodes().end());
  out.insert(out.end(), t.nodes().begin() + static_cast<std::ptrdiff_t>(end), t.nodes().end());
  return ExprTree::from_postfix(std::move(out));
}

// Each node independently, with per_node_prob, is redrawn from its own arity
// class: binary ops from binary ops, unary from unary, terminals from the
// terminal pool.  Shape, depth, and node count never change.
template <RandomSource R>
ExprTree node_replacement(const ExprTree& t, double per_node_prob, const FunctionSet& fs, R& rng) {
  std::vector<Node> nodes = t.nodes();
  for (Node& n : nodes) {
    if (!rng.bernoulli(per_node_prob)) continue;
    switch (n.arity) {
      case 0:
        n = fs.random_terminal(rng);
        break;
      case 1:
        if (!fs.unary_operators().empty())
          n.code = fs.unary_operators()[rng.uniform_index(fs.unary_operators().size())];
        break;
      default:
        if (!fs.binary_operators().empty())
          n.code = fs.binary_operators()[rng.uniform_index(fs.binary_operators().size())];
    }
  }
  return ExprTree::from_postfix(std::move(nodes));
}

// Applies one resolved mutation regime to a chromosome.
template <RandomSource R>
ExprTree apply_mutation(const LeafMutation& m, const ExprTree& t, const FunctionSet& fs, R& rng) {
  if (const auto* s = std::get_if<SubtreeMutation>(&m))
    return subtree_mutation(t, s->grow_min, s->grow_max, fs, rng);
  if (const auto* n = std::get_if<NodeReplacementMutation>(&m))
    return node_replacement(t, n->per_node_prob, fs, rng);
  return t;
}

}  // namespace pimpgp
