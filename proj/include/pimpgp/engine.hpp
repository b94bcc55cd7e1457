#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pimpgp/expr.hpp"
#include "pimpgp/population.hpp"
#include "pimpgp/problems.hpp"
#include "pimpgp/rng.hpp"
#include "pimpgp/selection.hpp"
#include "pimpgp/telemetry.hpp"
#include "pimpgp/variation.hpp"

namespace pimpgp {

// Derived RNG stream tags.  Fitness cases depend only on (problem, seed), so
// strategies compared under a shared seed see identical cases.
inline constexpr std::uint64_t kCasesStream = 1;
inline constexpr std::uint64_t kEvolutionStream = 2;

struct RunConfig {
  ProblemId problem = ProblemId::Koza1;
  std::string dataset_path;  // Diabetes source CSV
  int population_size = 100;
  int generations = 1500;
  std::uint64_t seed = 0;
  double crossover_prob = 0.9;  // per chromosome pair
  double mutation_prob = 0.05;  // per chromosome per offspring
  int max_depth = 17;
  int init_depth_min = 2;
  int init_depth_max = 7;
  SelectionStrategy selection = PimpSelection{};
  MutationStrategy mutation = SubtreeMutation{2, 7};
  std::optional<CaseSource> case_source_override;
  int snapshot_every = 0;  // extra snapshot cadence; 0 = only gen 0, switches, final
};

struct ConfigError : std::invalid_argument {
  ConfigError(std::string field_, const std::string& message)
      : std::invalid_argument(field_ + ": " + message), field(std::move(field_)) {}
  std::string field;
};

inline void validate_config(const RunConfig& cfg) {
  if (cfg.population_size < 2 || cfg.population_size % 2 != 0)
    throw ConfigError("population_size", "must be even and at least 2 (pairs breed 2 offspring)");
  if (cfg.generations < 1) throw ConfigError("generations", "must be at least 1");
  if (!(cfg.crossover_prob >= 0.0 && cfg.crossover_prob <= 1.0))
    throw ConfigError("crossover_prob", "must lie in [0,1]");
  if (!(cfg.mutation_prob >= 0.0 && cfg.mutation_prob <= 1.0))
    throw ConfigError("mutation_prob", "must lie in [0,1]");
  if (cfg.max_depth < 0) throw ConfigError("max_depth", "must be non-negative");
  if (cfg.init_depth_min < 0 || cfg.init_depth_min > cfg.init_depth_max)
    throw ConfigError("init_depth", "needs 0 <= min <= max");
  if (cfg.init_depth_max > cfg.max_depth)
    throw ConfigError("init_depth", "initial trees must respect max_depth");
  if (cfg.snapshot_every < 0) throw ConfigError("snapshot_every", "must be non-negative");
  try {
    validate_selection(cfg.selection);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("selection", e.what());
  }
  try {
    validate_mutation(cfg.mutation, cfg.generations);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("mutation", e.what());
  }
  if (cfg.problem == ProblemId::Diabetes && cfg.dataset_path.empty() &&
      !(cfg.case_source_override && std::holds_alternative<Dataset>(*cfg.case_source_override)))
    throw ConfigError("dataset_path", "the diabetes problem needs a dataset file");
}

inline Problem build_problem(const RunConfig& cfg) {
  Problem problem = make_problem(cfg.problem, cfg.problem == ProblemId::Diabetes
                                                  ? (cfg.dataset_path.empty() ? std::string("-")
                                                                              : cfg.dataset_path)
                                                  : std::string{});
  if (cfg.case_source_override) problem.case_source = *cfg.case_source_override;
  return problem;
}

// MSE of the tree's outputs against the targets.
inline double fitness_of(std::span<const double> semantics, const FitnessCases& cases) {
  return mean_squared_error(semantics, cases.targets);
}

inline Individual make_individual(ExprTree solution, ExprTree preference,
                                  const FitnessCases& cases, Evaluator& eval,
                                  bool want_pref_semantics) {
  Individual ind;
  ind.solution = std::move(solution);
  ind.preference = std::move(preference);
  ind.semantics = eval.run(ind.solution, cases.columns, cases.size());
  ind.fitness = fitness_of(ind.semantics, cases);
  if (want_pref_semantics)
    ind.preference_semantics = eval.run(ind.preference, cases.columns, cases.size());
  return ind;
}

// Ramped half-and-half for both chromosomes: all solution trees are drawn
// first, then all preference trees, each list alternating Grow/Full.
template <RandomSource R>
Population initialize_population(const RunConfig& cfg, const FunctionSet& fs,
                                 const FitnessCases& cases, Evaluator& eval,
                                 bool want_pref_semantics, R& rng) {
  const auto n = static_cast<std::size_t>(cfg.population_size);
  std::vector<ExprTree> solutions =
      ramped_half_and_half(n, cfg.init_depth_min, cfg.init_depth_max, fs, rng);
  std::vector<ExprTree> preferences =
      ramped_half_and_half(n, cfg.init_depth_min, cfg.init_depth_max, fs, rng);
  Population pop;
  pop.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    pop.push_back(make_individual(std::move(solutions[i]), std::move(preferences[i]), cases, eval,
                                  want_pref_semantics));
  return pop;
}

// Children deeper than the cap are discarded in favour of a copy of the
// contributing parent's chromosome.  The boundary is inclusive.
inline ExprTree enforce_depth_limit(ExprTree child, const ExprTree& fallback, int max_depth) {
  if (depth(child) <= max_depth) return child;
  return fallback;
}

struct StepResult {
  std::vector<RoleFlags> parent_roles;  // indexed like the parent population
  std::vector<ImprovementEvent> events;
};

// One generational step: population_size/2 pair selections, two offspring
// per pair, full replacement, no elitism.
//
// Draw order per pair (fixed; tests replay it): selection draws; one
// crossover coin for the solution pair (plus two node picks when it fires);
// one crossover coin for the preference pair (plus two picks); then per
// offspring, a mutation coin per chromosome (child1 solution, child1
// preference, child2 solution, child2 preference), each followed by the
// operator's own draws when it fires.  Mutation coins are drawn even under
// NoMutation so schedules differing only in operator keep draw sequences
// aligned within a phase... they do not across operators; the coin draw is
// simply unconditional for uniformity.
//
// `best_ever` is a running value: it updates as each offspring is scored, so
// an is_best_ever flag means "better than everything produced before this
// offspring anywhere in the run".  `schedule_gen` indexes the mutation
// schedule; steps are numbered 0..generations-1.
template <RandomSource R>
StepResult breed_generation(const Population& parents, Population& offspring, int schedule_gen,
                            const RunConfig& cfg, const FunctionSet& fs, const FitnessCases& cases,
                            Evaluator& eval, double& best_ever, R& rng) {
  const LeafMutation active = strategy_for_generation(cfg.mutation, schedule_gen);
  const bool want_pref = std::holds_alternative<PimpSelection>(cfg.selection);

  double prev_best = parents.front().fitness;
  for (const Individual& p : parents) prev_best = std::min(prev_best, p.fitness);

  StepResult result;
  result.parent_roles.assign(parents.size(), RoleFlags{});
  offspring.clear();
  offspring.reserve(parents.size());

  const auto breed_child = [&](ExprTree tree, const ExprTree& fallback_solution,
                               const ExprTree& fallback_pref, ExprTree pref_tree,
                               int chooser_pref_depth) {
    if (rng.bernoulli(cfg.mutation_prob)) tree = apply_mutation(active, tree, fs, rng);
    if (rng.bernoulli(cfg.mutation_prob)) pref_tree = apply_mutation(active, pref_tree, fs, rng);
    tree = enforce_depth_limit(std::move(tree), fallback_solution, cfg.max_depth);
    pref_tree = enforce_depth_limit(std::move(pref_tree), fallback_pref, cfg.max_depth);
    Individual child = make_individual(std::move(tree), std::move(pref_tree), cases, eval, want_pref);
    if (const auto event = record_improvement(child.fitness, prev_best, best_ever, chooser_pref_depth))
      result.events.push_back(*event);
    best_ever = std::min(best_ever, child.fitness);
    offspring.push_back(std::move(child));
  };

  const std::size_t pair_count = parents.size() / 2;
  for (std::size_t pair = 0; pair < pair_count; ++pair) {
    const auto [i1, i2] = select_pair(parents, cfg.selection, rng, result.parent_roles);
    const Individual& p1 = parents[i1];
    const Individual& p2 = parents[i2];
    const int chooser_pref_depth = depth(p1.preference);

    ExprTree s1 = p1.solution, s2 = p2.solution;
    if (rng.bernoulli(cfg.crossover_prob)) std::tie(s1, s2) = subtree_crossover(s1, s2, rng);
    ExprTree q1 = p1.preference, q2 = p2.preference;
    if (rng.bernoulli(cfg.crossover_prob)) std::tie(q1, q2) = subtree_crossover(q1, q2, rng);

    breed_child(std::move(s1), p1.solution, p1.preference, std::move(q1), chooser_pref_depth);
    breed_child(std::move(s2), p2.solution, p2.preference, std::move(q2), chooser_pref_depth);
  }
  return result;
}

// Canonical-string population dump for the snapshot log.  The selection
// flags describe how each member was used as a parent by the step that
// followed this snapshot's generation; the terminal generation is never
// selected from, so its flags are all false.
struct SnapshotEntry {
  std::string solution;
  std::string preference;
  int solution_depth = 0;
  int preference_depth = 0;
  double fitness = 0.0;
  bool chosen_by_tournament = false;
  bool chosen_by_mate_choice = false;
};

struct PopulationSnapshot {
  int generation = 0;
  std::vector<SnapshotEntry> entries;
};

inline PopulationSnapshot make_snapshot(int generation, const Population& pop,
                                        std::span<const RoleFlags> flags) {
  PopulationSnapshot snap;
  snap.generation = generation;
  snap.entries.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const Individual& ind = pop[i];
    const RoleFlags f = flags.empty() ? RoleFlags{} : flags[i];
    snap.entries.push_back({canonical_string(ind.solution), canonical_string(ind.preference),
                            depth(ind.solution), depth(ind.preference), ind.fitness,
                            f.chosen_by_tournament, f.chosen_by_mate_choice});
  }
  return snap;
}

struct RunResult {
  std::vector<GenerationRecord> records;  // one per generation, 0..generations
  std::vector<PopulationSnapshot> snapshots;
  double best_fitness_final = 0.0;
  double wall_clock_seconds = 0.0;

  RunFinals finals() const {
    const GenerationRecord& last = records.back();
    return RunFinals{last.generation,
                     last.best_fitness,
                     last.unique_solution_fraction,
                     last.unique_preference_fraction,
                     last.mean_solution_depth,
                     last.mean_preference_depth,
                     wall_clock_seconds};
  }
};

// Generations at which full population snapshots are written: generation 0,
// every hybrid switch point, the final generation, plus any configured
// cadence.
inline std::set<int> snapshot_generations(const RunConfig& cfg) {
  std::set<int> gens = {0, cfg.generations};
  if (const auto* h = std::get_if<HybridMutation>(&cfg.mutation))
    for (std::size_t i = 1; i < h->phases.size(); ++i) gens.insert(h->phases[i].from_gen);
  if (cfg.snapshot_every > 0)
    for (int g = 0; g <= cfg.generations; g += cfg.snapshot_every) gens.insert(g);
  return gens;
}

// Executes one full run.  Deterministic given the config (wall clock aside):
// the cases stream and the evolution stream are both derived from the seed.
// Per-generation logging goes through `on_record` when supplied, called once
// per record in generation order.
template <class RecordSink = std::nullptr_t>
RunResult run(const RunConfig& cfg, RecordSink&& on_record = nullptr) {
  validate_config(cfg);
  const Problem problem = build_problem(cfg);
  Rng cases_rng(cfg.seed, kCasesStream);
  const FitnessCases cases = make_cases(problem, cases_rng);
  Rng rng(cfg.seed, kEvolutionStream);
  Evaluator eval;
  const bool want_pref = std::holds_alternative<PimpSelection>(cfg.selection);
  const std::set<int> snapshot_at = snapshot_generations(cfg);

  const auto emit = [&](const GenerationRecord& rec) {
    if constexpr (!std::is_same_v<std::decay_t<RecordSink>, std::nullptr_t>) on_record(rec);
  };

  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.records.reserve(static_cast<std::size_t>(cfg.generations) + 1);

  Population pop =
      initialize_population(cfg, problem.function_set, cases, eval, want_pref, rng);
  {
    const std::vector<RoleFlags> no_flags(pop.size());
    result.records.push_back(make_generation_record(0, pop, pop, no_flags, {}));
    emit(result.records.back());
  }
  double best_ever = result.records.front().best_fitness;

  Population next;
  for (int step = 0; step < cfg.generations; ++step) {
    StepResult sr = breed_generation(pop, next, step, cfg, problem.function_set, cases, eval,
                                     best_ever, rng);
    if (snapshot_at.count(step) != 0)
      result.snapshots.push_back(make_snapshot(step, pop, sr.parent_roles));
    pop.swap(next);
    // `next` now holds the parents; the record's role block describes them.
    result.records.push_back(make_generation_record(step + 1, pop, next, sr.parent_roles,
                                                    std::move(sr.events)));
    emit(result.records.back());
  }
  result.snapshots.push_back(
      make_snapshot(cfg.generations, pop, std::vector<RoleFlags>(pop.size())));

  result.best_fitness_final = result.records.back().best_fitness;
  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace pimpgp
