#pragma once

#include <limits>
#include <vector>

#include "pimpgp/expr.hpp"

namespace pimpgp {

// A dual-chromosome individual: the solution tree competes on the objective;
// the preference tree encodes the mate this individual would pick and is
// never scored against the targets.  Output vectors over the fitness cases
// are cached so selection reuses them instead of re-evaluating.
struct Individual {
  ExprTree solution;
  ExprTree preference;
  double fitness = std::numeric_limits<double>::infinity();
  std::vector<double> semantics;             // solution outputs per case
  std::vector<double> preference_semantics;  // preference outputs per case (mate-choice runs only)
};

using Population = std::vector<Individual>;

}  // namespace pimpgp
