// Shows the parent-role bookkeeping that mate choice produces: choosers won
// a fitness tournament, courters were picked by a chooser's preference tree,
// and some individuals end up as both.
#include <cstdio>

#include "pimpgp/engine.hpp"

int main() {
  pimpgp::RunConfig cfg;
  cfg.problem = pimpgp::ProblemId::Nguyen6;
  cfg.population_size = 100;
  cfg.generations = 25;
  cfg.seed = 3;

  const pimpgp::RunResult result = pimpgp::run(cfg);
  std::printf("generation   chooser  courter   both  unselected\n");
  for (const pimpgp::GenerationRecord& rec : result.records) {
    if (rec.generation % 5 != 0) continue;
    std::printf("%10d   %6.2f%%  %6.2f%%  %5.2f%%  %9.2f%%\n", rec.generation,
                100.0 * rec.role_fractions.chooser, 100.0 * rec.role_fractions.courter,
                100.0 * rec.role_fractions.both, 100.0 * rec.role_fractions.unselected);
  }
  return 0;
}
