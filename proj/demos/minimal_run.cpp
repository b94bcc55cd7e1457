// Smallest useful example: one short mate-choice run on the quartic
// benchmark, printing a metric line every few generations.
#include <cstdio>

#include "pimpgp/engine.hpp"

int main() {
  pimpgp::RunConfig cfg;
  cfg.problem = pimpgp::ProblemId::Koza1;
  cfg.population_size = 100;
  cfg.generations = 60;
  cfg.seed = 42;

  const pimpgp::RunResult result = pimpgp::run(cfg, [](const pimpgp::GenerationRecord& rec) {
    if (rec.generation % 10 != 0) return;
    std::printf("gen %3d  best %.6g  unique %.0f%%  sol depth %.1f  pref depth %.1f\n",
                rec.generation, rec.best_fitness, 100.0 * rec.unique_solution_fraction,
                rec.mean_solution_depth, rec.mean_preference_depth);
  });

  std::printf("final best fitness: %.6g (%.2fs)\n", result.best_fitness_final,
              result.wall_clock_seconds);
  return 0;
}
