#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pimpgp/rng.hpp"

namespace pimpgp {

// Every operator result is clamped into [-kValueCap, kValueCap] and NaN is
// mapped to 0, so evaluation is total and squared-error sums stay finite.
inline constexpr double kValueCap = 1e150;
// Divisors and log arguments below this magnitude trigger the protected case.
inline constexpr double kProtectEpsilon = 1e-9;

enum class Op : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Var,
  Const,
};

constexpr int arity_of(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Abs:
      return 1;
    case Op::Var:
    case Op::Const:
      return 0;
  }
  return 0;
}

constexpr bool is_terminal(Op op) { return arity_of(op) == 0; }

constexpr const char* mnemonic(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Var: return "var";
    case Op::Const: return "const";
  }
  return "?";
}

// One tree node.  Trees are stored as flat postfix arrays (children precede
// parents, root last); `subtree` is the node count of the subtree rooted
// here, so subtree extraction and replacement are plain range operations.
struct Node {
  Op code;
  std::uint8_t arity;
  std::int16_t payload;   // Var: variable index.  Const: integer value.
  std::uint32_t subtree;  // nodes in this subtree, including this one
};
static_assert(sizeof(Node) == 8);

inline Node make_var(int index) {
  return Node{Op::Var, 0, static_cast<std::int16_t>(index), 1};
}
inline Node make_const(int value) {
  return Node{Op::Const, 0, static_cast<std::int16_t>(value), 1};
}
inline Node make_op(Op op) {
  return Node{op, static_cast<std::uint8_t>(arity_of(op)), 0, 0};
}

// Inclusive integer range for the constant terminals of a function set.
struct ConstantRange {
  int lo = -10;
  int hi = 10;
};

// The primitives a tree may be built from: function operators, input
// variables x0..x{n-1}, and optionally integer constants.  Unary/binary
// pools are precomputed for same-arity node replacement.
class FunctionSet {
 public:
  FunctionSet(std::vector<Op> operators, int variable_count,
              std::optional<ConstantRange> constants = std::nullopt)
      : operators_(std::move(operators)),
        variable_count_(variable_count),
        constants_(constants) {
    if (operators_.empty()) throw std::invalid_argument("function set needs at least one operator");
    if (variable_count_ < 1) throw std::invalid_argument("function set needs at least one variable");
    for (Op op : operators_) {
      switch (arity_of(op)) {
        case 2: binary_.push_back(op); break;
        case 1: unary_.push_back(op); break;
        default: throw std::invalid_argument("terminals do not belong in the operator list");
      }
    }
    if (constants_ && constants_->lo > constants_->hi)
      throw std::invalid_argument("constant range is empty");
  }

  const std::vector<Op>& operators() const { return operators_; }
  const std::vector<Op>& binary_operators() const { return binary_; }
  const std::vector<Op>& unary_operators() const { return unary_; }
  int variable_count() const { return variable_count_; }
  const std::optional<ConstantRange>& constants() const { return constants_; }

  // Distinct terminal choices: one per variable plus one slot for "a random
  // constant" when constants are enabled.
  std::size_t terminal_kinds() const {
    return static_cast<std::size_t>(variable_count_) + (constants_ ? 1 : 0);
  }

  // kind in [0, terminal_kinds()); the constant slot draws its value.
  template <RandomSource R>
  Node terminal_for_kind(std::size_t kind, R& rng) const {
    if (kind < static_cast<std::size_t>(variable_count_)) return make_var(static_cast<int>(kind));
    return make_const(rng.uniform_int(constants_->lo, constants_->hi));
  }

  template <RandomSource R>
  Node random_terminal(R& rng) const {
    return terminal_for_kind(rng.uniform_index(terminal_kinds()), rng);
  }

  template <RandomSource R>
  Op random_operator(R& rng) const {
    return operators_[rng.uniform_index(operators_.size())];
  }

 private:
  std::vector<Op> operators_;
  std::vector<Op> binary_;
  std::vector<Op> unary_;
  int variable_count_;
  std::optional<ConstantRange> constants_;
};

// Recomputes the `subtree` size field of every node in a postfix array.
// Throws if the array is not a well-formed single expression.
inline void fix_subtree_sizes(std::vector<Node>& nodes) {
  static thread_local std::vector<std::uint32_t> stack;
  stack.clear();
  for (Node& n : nodes) {
    std::uint32_t size = 1;
    if (n.arity > stack.size()) throw std::invalid_argument("postfix array underflows");
    for (int i = 0; i < n.arity; ++i) {
      size += stack.back();
      stack.pop_back();
    }
    n.subtree = size;
    stack.push_back(size);
  }
  if (stack.size() != 1) throw std::invalid_argument("postfix array is not a single expression");
}

// Immutable-by-convention expression tree.  Node payloads are value types,
// so copies are cheap memcpys of one vector.
class ExprTree {
 public:
  ExprTree() = default;

  // Takes ownership of a postfix node array and validates it.
  static ExprTree from_postfix(std::vector<Node> nodes) {
    fix_subtree_sizes(nodes);
    return ExprTree(std::move(nodes));
  }

  static ExprTree variable(int index) { return ExprTree({make_var(index)}); }
  static ExprTree constant(int value) { return ExprTree({make_const(value)}); }

  static ExprTree unary(Op op, const ExprTree& child) {
    if (arity_of(op) != 1) throw std::invalid_argument("unary() needs a unary operator");
    std::vector<Node> nodes = child.nodes_;
    Node n = make_op(op);
    n.subtree = static_cast<std::uint32_t>(nodes.size()) + 1;
    nodes.push_back(n);
    return ExprTree(std::move(nodes));
  }

  static ExprTree binary(Op op, const ExprTree& lhs, const ExprTree& rhs) {
    if (arity_of(op) != 2) throw std::invalid_argument("binary() needs a binary operator");
    std::vector<Node> nodes = lhs.nodes_;
    nodes.insert(nodes.end(), rhs.nodes_.begin(), rhs.nodes_.end());
    Node n = make_op(op);
    n.subtree = static_cast<std::uint32_t>(nodes.size()) + 1;
    nodes.push_back(n);
    return ExprTree(std::move(nodes));
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.back(); }
  std::size_t root_index() const { return nodes_.size() - 1; }

  // First node index of the subtree rooted at `index`.
  std::size_t subtree_begin(std::size_t index) const {
    return index + 1 - nodes_[index].subtree;
  }

  // Child root indices of the node at `index`, left to right.
  std::vector<std::size_t> child_indices(std::size_t index) const {
    std::vector<std::size_t> out(nodes_[index].arity);
    std::size_t at = index - 1;
    for (int k = nodes_[index].arity - 1; k >= 0; --k) {
      out[static_cast<std::size_t>(k)] = at;
      at -= nodes_[at].subtree;
    }
    return out;
  }

  friend bool operator==(const ExprTree& a, const ExprTree& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i)
      if (a.nodes_[i].code != b.nodes_[i].code || a.nodes_[i].payload != b.nodes_[i].payload)
        return false;
    return true;
  }

 private:
  explicit ExprTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
  std::vector<Node> nodes_;
};

inline std::size_t node_count(const ExprTree& tree) { return tree.size(); }

// Depth of the tree: edges on the longest root-to-leaf path.  A single node
// has depth 0.
inline int depth(const ExprTree& tree) {
  static thread_local std::vector<int> stack;
  stack.clear();
  for (const Node& n : tree.nodes()) {
    int d = 0;
    for (int i = 0; i < n.arity; ++i) {
      d = std::max(d, stack.back() + 1);
      stack.pop_back();
    }
    stack.push_back(d);
  }
  const int result = stack.back();
  stack.pop_back();
  return result;
}

// Depth (edge count) of every node below the root, indexed by node position.
inline void node_depths(const ExprTree& tree, std::vector<int>& out) {
  out.assign(tree.size(), 0);
  for (std::size_t i = tree.size(); i-- > 0;) {
    const Node& n = tree.nodes()[i];
    std::size_t at = i - 1;
    for (int k = 0; k < n.arity; ++k) {
      out[at] = out[i] + 1;
      at -= tree.nodes()[at].subtree;
    }
  }
}

namespace detail {

inline void append_canonical(const ExprTree& tree, std::size_t index, std::string& out) {
  const Node& n = tree.nodes()[index];
  switch (n.code) {
    case Op::Var:
      out += 'x';
      out += std::to_string(static_cast<int>(n.payload));
      return;
    case Op::Const:
      out += std::to_string(static_cast<int>(n.payload));
      return;
    default: {
      out += '(';
      out += mnemonic(n.code);
      for (std::size_t child : tree.child_indices(index)) {
        out += ' ';
        append_canonical(tree, child, out);
      }
      out += ')';
    }
  }
}

}  // namespace detail

// Prefix rendering with one fixed spelling per tree: operators parenthesised,
// variables as x<i>, constants with one decimal place.  Structural equality
// of trees coincides with string equality, so this doubles as a hash key for
// uniqueness counts.
inline std::string canonical_string(const ExprTree& tree) {
  std::string out;
  out.reserve(tree.size() * 6);
  detail::append_canonical(tree, tree.root_index(), out);
  return out;
}

inline double protect(double x) {
  if (std::isnan(x)) return 0.0;
  if (x > kValueCap) return kValueCap;
  if (x < -kValueCap) return -kValueCap;
  return x;
}

inline double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Sin: return protect(std::sin(a));
    case Op::Cos: return protect(std::cos(a));
    case Op::Exp: return protect(std::exp(a));
    case Op::Log: return std::fabs(a) < kProtectEpsilon ? 0.0 : protect(std::log(std::fabs(a)));
    case Op::Sqrt: return protect(std::sqrt(std::fabs(a)));
    case Op::Abs: return protect(std::fabs(a));
    default: throw std::logic_error("not a unary operator");
  }
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return protect(a + b);
    case Op::Sub: return protect(a - b);
    case Op::Mul: return protect(a * b);
    case Op::Div: return std::fabs(b) < kProtectEpsilon ? 1.0 : protect(a / b);
    default: throw std::logic_error("not a binary operator");
  }
}

// Operand stack depth needed to evaluate the tree postfix-wise.
inline std::size_t eval_stack_depth(const ExprTree& tree) {
  std::size_t depth = 0, peak = 0;
  for (const Node& n : tree.nodes()) {
    depth = depth - n.arity + 1;
    peak = std::max(peak, depth);
  }
  return peak;
}

// Single-case evaluation.  Bitwise-identical to the batch evaluator.
inline double evaluate(const ExprTree& tree, std::span<const double> inputs) {
  static thread_local std::vector<double> stack;
  stack.clear();
  for (const Node& n : tree.nodes()) {
    switch (n.code) {
      case Op::Var: {
        const auto v = static_cast<std::size_t>(n.payload);
        if (v >= inputs.size()) throw std::out_of_range("variable index exceeds input arity");
        stack.push_back(inputs[v]);
        break;
      }
      case Op::Const:
        stack.push_back(static_cast<double>(n.payload));
        break;
      default:
        if (n.arity == 1) {
          stack.back() = apply_unary(n.code, stack.back());
        } else {
          const double b = stack.back();
          stack.pop_back();
          stack.back() = apply_binary(n.code, stack.back(), b);
        }
    }
  }
  const double result = stack.back();
  stack.pop_back();
  return result;
}

// Batch evaluator: runs a tree over all fitness cases at once, one operand
// stack level per column of cases.  Owns its scratch space so the per-call
// cost is just the arithmetic.
class Evaluator {
 public:
  // columns[v][c] = value of variable v in case c.  Writes out[c] for every
  // case; all outputs are finite by the protection rules.
  void run(const ExprTree& tree, std::span<const std::vector<double>> columns,
           std::size_t cases, std::span<double> out) {
    const std::size_t levels = eval_stack_depth(tree);
    if (scratch_.size() < levels * cases) scratch_.resize(levels * cases);
    double* const base = scratch_.data();
    std::size_t top = 0;  // next free level
    for (const Node& n : tree.nodes()) {
      switch (n.code) {
        case Op::Var: {
          const auto v = static_cast<std::size_t>(n.payload);
          if (v >= columns.size()) throw std::out_of_range("variable index exceeds input arity");
          std::copy_n(columns[v].data(), cases, base + top * cases);
          ++top;
          break;
        }
        case Op::Const: {
          std::fill_n(base + top * cases, cases, static_cast<double>(n.payload));
          ++top;
          break;
        }
        default:
          if (n.arity == 1) {
            double* a = base + (top - 1) * cases;
            for (std::size_t c = 0; c < cases; ++c) a[c] = apply_unary(n.code, a[c]);
          } else {
            double* a = base + (top - 2) * cases;
            const double* b = base + (top - 1) * cases;
            for (std::size_t c = 0; c < cases; ++c) a[c] = apply_binary(n.code, a[c], b[c]);
            --top;
          }
      }
    }
    std::copy_n(base, cases, out.data());
  }

  std::vector<double> run(const ExprTree& tree, std::span<const std::vector<double>> columns,
                          std::size_t cases) {
    std::vector<double> out(cases);
    run(tree, columns, cases, out);
    return out;
  }

 private:
  std::vector<double> scratch_;
};

enum class GenMethod : std::uint8_t { Full, Grow };

namespace detail {

// Draw order is one decision per node in prefix (root first, children left
// to right) so scripted sources can steer generation precisely.
template <RandomSource R>
void gen_subtree(GenMethod method, int depth_left, const FunctionSet& fs, R& rng,
                 std::vector<Node>& out) {
  if (depth_left == 0) {
    out.push_back(fs.random_terminal(rng));
    return;
  }
  Op op;
  if (method == GenMethod::Full) {
    op = fs.random_operator(rng);
  } else {
    const std::size_t choices = fs.operators().size() + fs.terminal_kinds();
    const std::size_t pick = rng.uniform_index(choices);
    if (pick >= fs.operators().size()) {
      out.push_back(fs.terminal_for_kind(pick - fs.operators().size(), rng));
      return;
    }
    op = fs.operators()[pick];
  }
  // Children go in left to right; the parent node is appended afterwards to
  // keep the array in postfix order.
  const std::size_t mark = out.size();
  for (int i = 0; i < arity_of(op); ++i) gen_subtree(method, depth_left - 1, fs, rng, out);
  Node n = make_op(op);
  n.subtree = static_cast<std::uint32_t>(out.size() - mark) + 1;
  out.push_back(n);
}

}  // namespace detail

// Full: every leaf sits exactly at `depth_target`.  Grow: each node below
// the target depth is drawn from operators and terminals together, so depth
// is at most `depth_target`.
template <RandomSource R>
ExprTree random_tree(GenMethod method, int depth_target, const FunctionSet& fs, R& rng) {
  if (depth_target < 0) throw std::invalid_argument("depth target must be non-negative");
  std::vector<Node> nodes;
  detail::gen_subtree(method, depth_target, fs, rng, nodes);
  return ExprTree::from_postfix(std::move(nodes));
}

// One ramped draw: target depth uniform in [min_depth, max_depth], then a
// fair coin for Full versus Grow (true picks Full).
template <RandomSource R>
ExprTree random_tree_ramped(int min_depth, int max_depth, const FunctionSet& fs, R& rng) {
  const int target = rng.uniform_int(min_depth, max_depth);
  const GenMethod method = rng.bernoulli(0.5) ? GenMethod::Full : GenMethod::Grow;
  return random_tree(method, target, fs, rng);
}

// Ramped half-and-half: each tree draws a depth target uniformly from
// [min_depth, max_depth]; the method alternates Grow, Full, Grow, ... so an
// odd count gives Grow the extra tree.
template <RandomSource R>
std::vector<ExprTree> ramped_half_and_half(std::size_t count, int min_depth, int max_depth,
                                           const FunctionSet& fs, R& rng) {
  if (min_depth < 0 || min_depth > max_depth) throw std::invalid_argument("depth ramp is empty");
  std::vector<ExprTree> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int target = rng.uniform_int(min_depth, max_depth);
    const GenMethod method = (i % 2 == 0) ? GenMethod::Grow : GenMethod::Full;
    out.push_back(random_tree(method, target, fs, rng));
  }
  return out;
}

// Structural well-formedness: postfix arity consistency, one root, size
// fields correct, terminal payloads plausible.  Meant for tests and debug
// assertions, not hot paths.
inline bool structurally_valid(const ExprTree& tree) {
  if (tree.empty()) return false;
  std::size_t stack = 0;
  std::size_t i = 0;
  for (const Node& n : tree.nodes()) {
    if (n.arity != arity_of(n.code)) return false;
    if (n.arity > stack) return false;
    stack = stack - n.arity + 1;
    std::uint32_t size = 1;
    if (n.arity > 0) {
      std::size_t at = i - 1;
      for (int k = 0; k < n.arity; ++k) {
        size += tree.nodes()[at].subtree;
        at -= tree.nodes()[at].subtree;
      }
    }
    if (n.subtree != size) return false;
    if (n.code == Op::Var && n.payload < 0) return false;
    ++i;
  }
  return stack == 1;
}

// Whether every node of the tree could have been produced from this
// function set.
inline bool compatible_with(const ExprTree& tree, const FunctionSet& fs) {
  for (const Node& n : tree.nodes()) {
    switch (n.code) {
      case Op::Var:
        if (n.payload >= fs.variable_count()) return false;
        break;
      case Op::Const:
        if (!fs.constants() || n.payload < fs.constants()->lo || n.payload > fs.constants()->hi)
          return false;
        break;
      default:
        if (std::find(fs.operators().begin(), fs.operators().end(), n.code) ==
            fs.operators().end())
          return false;
    }
  }
  return true;
}

}  // namespace pimpgp
