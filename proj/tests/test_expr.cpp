#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "pimpgp/expr.hpp"
#include "pimpgp/rng.hpp"
#include "scripted_rng.hpp"

using namespace pimpgp;
using pimpgp::testing::ScriptedRng;

namespace {

FunctionSet core_fs(int vars = 1) {
  return FunctionSet({Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sin, Op::Cos, Op::Exp, Op::Log},
                     vars);
}

FunctionSet binary_fs(int vars = 1) {
  return FunctionSet({Op::Add, Op::Sub, Op::Mul, Op::Div}, vars);
}

ExprTree quartic_tree() {
  // x^4 + x^3 + x^2 + x built from explicit products
  const ExprTree x = ExprTree::variable(0);
  const ExprTree x2 = ExprTree::binary(Op::Mul, x, x);
  const ExprTree x3 = ExprTree::binary(Op::Mul, x2, x);
  const ExprTree x4 = ExprTree::binary(Op::Mul, x2, x2);
  return ExprTree::binary(
      Op::Add, ExprTree::binary(Op::Add, ExprTree::binary(Op::Add, x4, x3), x2), x);
}

std::vector<int> leaf_depths(const ExprTree& t) {
  std::vector<int> depths;
  node_depths(t, depths);
  std::vector<int> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.nodes()[i].arity == 0) out.push_back(depths[i]);
  return out;
}

}  // namespace

TEST_CASE("evaluate handles the quartic polynomial", "[expr]") {
  const double in[] = {2.0};
  CHECK(evaluate(quartic_tree(), in) == 30.0);
}

TEST_CASE("evaluate of a bare variable is the identity", "[expr]") {
  const double in[] = {3.5};
  CHECK(evaluate(ExprTree::variable(0), in) == 3.5);
}

TEST_CASE("division by a near-zero denominator yields one", "[expr]") {
  const ExprTree t =
      ExprTree::binary(Op::Div, ExprTree::variable(0), ExprTree::variable(0));
  const double zero[] = {0.0};
  CHECK(evaluate(t, zero) == 1.0);
  const double tiny[] = {1e-10};
  CHECK(evaluate(t, tiny) == 1.0);
  const double fine[] = {2.0};
  CHECK(evaluate(t, fine) == 1.0);
}

TEST_CASE("evaluate reproduces the two-variable rational benchmark at (1,1)", "[expr]") {
  // 1/(1+v^-4) rewritten constant-free as v^4 / (v^4 + v/v)
  const auto term = [](int var) {
    const ExprTree v = ExprTree::variable(var);
    const ExprTree v2 = ExprTree::binary(Op::Mul, v, v);
    const ExprTree v4 = ExprTree::binary(Op::Mul, v2, v2);
    const ExprTree one = ExprTree::binary(Op::Div, v, v);
    return ExprTree::binary(Op::Div, v4, ExprTree::binary(Op::Add, v4, one));
  };
  const ExprTree t = ExprTree::binary(Op::Add, term(0), term(1));
  const double in[] = {1.0, 1.0};
  CHECK(evaluate(t, in) == 1.0);
}

TEST_CASE("protected log and sqrt and abs semantics", "[expr]") {
  const ExprTree log_x = ExprTree::unary(Op::Log, ExprTree::variable(0));
  const double zero[] = {0.0};
  CHECK(evaluate(log_x, zero) == 0.0);
  const double minus_e[] = {-std::exp(1.0)};
  CHECK(evaluate(log_x, minus_e) == Catch::Approx(1.0));

  const ExprTree sqrt_x = ExprTree::unary(Op::Sqrt, ExprTree::variable(0));
  const double minus_four[] = {-4.0};
  CHECK(evaluate(sqrt_x, minus_four) == 2.0);

  const ExprTree abs_x = ExprTree::unary(Op::Abs, ExprTree::variable(0));
  const double minus_three[] = {-3.0};
  CHECK(evaluate(abs_x, minus_three) == 3.0);
}

TEST_CASE("evaluation is total on extreme inputs", "[expr]") {
  const ExprTree exp_x = ExprTree::unary(Op::Exp, ExprTree::variable(0));
  const double huge[] = {1e6};
  CHECK(evaluate(exp_x, huge) == kValueCap);

  const ExprTree sin_x = ExprTree::unary(Op::Sin, ExprTree::variable(0));
  const double inf[] = {std::numeric_limits<double>::infinity()};
  CHECK(evaluate(sin_x, inf) == 0.0);  // sin(inf) is NaN, protected to 0

  const ExprTree add_xx =
      ExprTree::binary(Op::Add, ExprTree::variable(0), ExprTree::variable(0));
  CHECK(evaluate(add_xx, inf) == kValueCap);
}

TEST_CASE("depth counts edges with single nodes at zero", "[expr]") {
  const ExprTree leaf = ExprTree::variable(0);
  CHECK(depth(leaf) == 0);
  const ExprTree add = ExprTree::binary(Op::Add, leaf, leaf);
  CHECK(depth(add) == 1);
  const ExprTree mixed = ExprTree::binary(Op::Add, ExprTree::unary(Op::Sin, leaf), leaf);
  CHECK(depth(mixed) == 2);
}

TEST_CASE("node_count counts every node", "[expr]") {
  const ExprTree leaf = ExprTree::variable(0);
  CHECK(node_count(leaf) == 1);
  CHECK(node_count(ExprTree::binary(Op::Add, leaf, leaf)) == 3);
  CHECK(node_count(ExprTree::binary(Op::Add, ExprTree::unary(Op::Sin, leaf), leaf)) == 4);
}

TEST_CASE("canonical strings use prefix form", "[expr]") {
  CHECK(canonical_string(ExprTree::variable(0)) == "x0");
  CHECK(canonical_string(ExprTree::binary(Op::Add, ExprTree::variable(0),
                                          ExprTree::variable(0))) == "(add x0 x0)");
  const ExprTree a = ExprTree::unary(Op::Sin, ExprTree::variable(0));
  const ExprTree b = ExprTree::unary(Op::Sin, ExprTree::variable(0));
  CHECK(canonical_string(a) == canonical_string(b));
  CHECK(canonical_string(ExprTree::binary(Op::Mul, ExprTree::constant(3),
                                          ExprTree::variable(1))) == "(mul 3 x1)");
  CHECK(canonical_string(ExprTree::constant(-7)) == "-7");
}

TEST_CASE("full trees put every leaf at the target depth", "[expr]") {
  Rng rng(21);
  const FunctionSet fs = core_fs();
  CHECK(node_count(random_tree(GenMethod::Full, 0, fs, rng)) == 1);
  for (int trial = 0; trial < 50; ++trial) {
    const ExprTree t = random_tree(GenMethod::Full, 2, fs, rng);
    REQUIRE(structurally_valid(t));
    for (const int d : leaf_depths(t)) REQUIRE(d == 2);
  }
}

TEST_CASE("grow trees never exceed the target depth", "[expr]") {
  Rng rng(22);
  const FunctionSet fs = core_fs();
  int max_seen = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ExprTree t = random_tree(GenMethod::Grow, 7, fs, rng);
    REQUIRE(structurally_valid(t));
    max_seen = std::max(max_seen, depth(t));
  }
  CHECK(max_seen <= 7);
  CHECK(max_seen >= 5);  // sanity: growth does happen
}

TEST_CASE("full binary trees have the closed-form node count", "[expr]") {
  Rng rng(23);
  const FunctionSet fs = binary_fs();
  for (int d = 0; d <= 5; ++d) {
    const ExprTree t = random_tree(GenMethod::Full, d, fs, rng);
    CHECK(node_count(t) == (std::size_t{1} << (d + 1)) - 1);
  }
}

TEST_CASE("ramped initialization respects bounds and alternates methods", "[expr]") {
  Rng rng(24);
  const FunctionSet fs = core_fs();
  const auto trees = ramped_half_and_half(100, 2, 7, fs, rng);
  REQUIRE(trees.size() == 100);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    REQUIRE(structurally_valid(trees[i]));
    REQUIRE(depth(trees[i]) <= 7);
    // Odd positions are Full draws: depth equals the target, at least 2.
    if (i % 2 == 1) REQUIRE(depth(trees[i]) >= 2);
  }

  CHECK(ramped_half_and_half(0, 2, 7, fs, rng).empty());
  const auto leaves = ramped_half_and_half(2, 0, 0, fs, rng);
  REQUIRE(leaves.size() == 2);
  CHECK(node_count(leaves[0]) == 1);
  CHECK(node_count(leaves[1]) == 1);
}

TEST_CASE("ramped alternation starts with grow", "[expr]") {
  // Scripted draws: binary-only set with one variable.  Each tree draws its
  // depth target (1).  Grow draws from 4 ops + 1 terminal kind; index 4 is
  // the terminal, making the tree a bare leaf.  Full draws operator index 0
  // (add) and two terminals.
  ScriptedRng rng;
  rng.ints = {1, 1, 1, 1};
  rng.indices = {4, /*full:*/ 0, 0, 0, /*grow:*/ 4, /*full:*/ 0, 0, 0};
  const FunctionSet fs = binary_fs();
  const auto trees = ramped_half_and_half(4, 1, 1, fs, rng);
  REQUIRE(trees.size() == 4);
  CHECK(canonical_string(trees[0]) == "x0");
  CHECK(canonical_string(trees[1]) == "(add x0 x0)");
  CHECK(canonical_string(trees[2]) == "x0");
  CHECK(canonical_string(trees[3]) == "(add x0 x0)");
  CHECK(rng.exhausted());
}

TEST_CASE("canonical strings are injective on structure", "[expr]") {
  Rng rng(25);
  const FunctionSet fs = core_fs(2);
  std::vector<ExprTree> pool;
  for (int i = 0; i < 60; ++i) pool.push_back(random_tree_ramped(0, 4, fs, rng));
  pool.push_back(pool[0]);  // guarantee at least one equal pair
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const bool same_string = canonical_string(pool[i]) == canonical_string(pool[j]);
      const bool same_structure = pool[i] == pool[j];
      REQUIRE(same_string == same_structure);
    }
}

TEST_CASE("depth and node count are mutually consistent", "[expr]") {
  Rng rng(26);
  const FunctionSet fs = core_fs();
  for (int i = 0; i < 500; ++i) {
    const ExprTree t = random_tree_ramped(0, 6, fs, rng);
    REQUIRE(static_cast<std::size_t>(depth(t)) < node_count(t));
    REQUIRE((depth(t) == 0) == (node_count(t) == 1));
  }
}

TEST_CASE("evaluation is finite for any tree and finite inputs", "[expr]") {
  Rng rng(27);
  const FunctionSet fs = core_fs(2);
  const double extremes[] = {0.0, 1.0, -1.0, 1e-12, 1e10, -1e10, 1e150, -1e150};
  for (int i = 0; i < 2000; ++i) {
    const ExprTree t = random_tree_ramped(0, 6, fs, rng);
    const double in[] = {extremes[rng.uniform_index(8)], extremes[rng.uniform_index(8)]};
    const double out = evaluate(t, in);
    REQUIRE(std::isfinite(out));
    REQUIRE(std::fabs(out) <= kValueCap);
  }
}

TEST_CASE("batch evaluation agrees bitwise with scalar evaluation", "[expr]") {
  Rng rng(28);
  const FunctionSet fs = core_fs(2);
  Evaluator eval;
  for (int trial = 0; trial < 200; ++trial) {
    const ExprTree t = random_tree_ramped(0, 6, fs, rng);
    std::vector<std::vector<double>> columns(2);
    for (int c = 0; c < 5; ++c) {
      columns[0].push_back(rng.uniform_real() * 20.0 - 10.0);
      columns[1].push_back(rng.uniform_real() * 2e10 - 1e10);
    }
    const std::vector<double> batch = eval.run(t, columns, 5);
    for (std::size_t c = 0; c < 5; ++c) {
      const double in[] = {columns[0][c], columns[1][c]};
      REQUIRE(batch[c] == evaluate(t, in));
    }
  }
}

TEST_CASE("malformed postfix arrays are rejected", "[expr]") {
  CHECK_THROWS_AS(ExprTree::from_postfix({}), std::invalid_argument);
  CHECK_THROWS_AS(ExprTree::from_postfix({make_op(Op::Add)}), std::invalid_argument);
  CHECK_THROWS_AS(ExprTree::from_postfix({make_var(0), make_var(0)}), std::invalid_argument);
}

TEST_CASE("variable indexes beyond the input arity are structural errors", "[expr]") {
  const ExprTree t = ExprTree::variable(3);
  const double in[] = {1.0};
  CHECK_THROWS_AS(evaluate(t, in), std::out_of_range);
  Evaluator eval;
  std::vector<std::vector<double>> columns = {{1.0}};
  CHECK_THROWS_AS(eval.run(t, columns, 1), std::out_of_range);
}

TEST_CASE("function set compatibility checks terminals and operators", "[expr]") {
  const FunctionSet fs = core_fs(1);
  CHECK(compatible_with(quartic_tree(), fs));
  CHECK_FALSE(compatible_with(ExprTree::variable(1), fs));
  CHECK_FALSE(compatible_with(ExprTree::constant(3), fs));
  CHECK_FALSE(compatible_with(ExprTree::unary(Op::Sqrt, ExprTree::variable(0)), fs));
  const FunctionSet rich({Op::Add, Op::Sqrt}, 2, ConstantRange{-10, 10});
  CHECK(compatible_with(ExprTree::constant(10), rich));
  CHECK_FALSE(compatible_with(ExprTree::constant(11), rich));
}

TEST_CASE("function sets validate their construction", "[expr]") {
  CHECK_THROWS_AS(FunctionSet({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(FunctionSet({Op::Add}, 0), std::invalid_argument);
  CHECK_THROWS_AS(FunctionSet({Op::Var}, 1), std::invalid_argument);
  CHECK_THROWS_AS(FunctionSet({Op::Add}, 1, ConstantRange{5, 4}), std::invalid_argument);
}
