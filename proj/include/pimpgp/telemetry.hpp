#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pimpgp/expr.hpp"
#include "pimpgp/population.hpp"
#include "pimpgp/selection.hpp"
#include "pimpgp/stats.hpp"

namespace pimpgp {

enum class Chromosome { Solution, Preference };

inline constexpr int kDepthBuckets = 18;  // depths 0..17, the depth-cap domain

// Emitted when an offspring beats the previous generation's best fitness;
// tagged with the depth of its first parent's preference tree, and flagged
// when it also beats the best fitness seen anywhere in the run.
struct ImprovementEvent {
  int preference_depth = 0;
  bool is_best_ever = false;
};

inline std::optional<ImprovementEvent> record_improvement(double offspring_fitness,
                                                          double previous_best, double best_ever,
                                                          int chooser_pref_depth) {
  if (!(offspring_fitness < previous_best)) return std::nullopt;
  return ImprovementEvent{chooser_pref_depth, offspring_fitness < best_ever};
}

// One telemetry row.  Population metrics describe the named generation's
// individuals.  The role block describes the PARENT population of this
// generation (the individuals whose selection produced it); generation 0 has
// no parents, so its role block reports its own members as all-unselected.
struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double unique_solution_fraction = 0.0;
  double unique_preference_fraction = 0.0;
  double mean_solution_depth = 0.0;
  double mean_preference_depth = 0.0;
  RoleFractions role_fractions;
  std::array<std::optional<double>, 4> per_role_mean_depth;    // solution chromosome, by Role
  std::array<std::optional<double>, 4> per_role_best_fitness;  // by Role
  // counts by depth 0..17, keyed by (role, chromosome)
  std::array<std::array<int, kDepthBuckets>, 8> depth_histograms{};
  std::vector<ImprovementEvent> improvement_events;
};

constexpr std::size_t histogram_slot(Role role, Chromosome chromosome) {
  return static_cast<std::size_t>(role) * 2 + (chromosome == Chromosome::Preference ? 1 : 0);
}

// Distinct canonical strings over one chromosome, as a fraction of the
// population size.
inline double unique_fraction(const Population& pop, Chromosome chromosome) {
  if (pop.empty()) throw std::invalid_argument("unique fraction of an empty population");
  std::unordered_set<std::string> seen;
  seen.reserve(pop.size() * 2);
  for (const Individual& ind : pop)
    seen.insert(canonical_string(chromosome == Chromosome::Solution ? ind.solution : ind.preference));
  return static_cast<double>(seen.size()) / static_cast<double>(pop.size());
}

inline double mean_depth(const Population& pop, Chromosome chromosome) {
  if (pop.empty()) throw std::invalid_argument("mean depth of an empty population");
  double sum = 0.0;
  for (const Individual& ind : pop)
    sum += depth(chromosome == Chromosome::Solution ? ind.solution : ind.preference);
  return sum / static_cast<double>(pop.size());
}

// Builds one record.  `role_population`/`role_flags` are the parents whose
// selection bred `current` (for generation 0, pass `current` itself with
// all-default flags).
inline GenerationRecord make_generation_record(int generation, const Population& current,
                                               const Population& role_population,
                                               std::span<const RoleFlags> role_flags,
                                               std::vector<ImprovementEvent> events) {
  if (current.empty() || role_population.size() != role_flags.size())
    throw std::invalid_argument("generation record needs a population and a matching role log");
  GenerationRecord rec;
  rec.generation = generation;
  rec.improvement_events = std::move(events);

  rec.best_fitness = current.front().fitness;
  double fitness_sum = 0.0;
  for (const Individual& ind : current) {
    rec.best_fitness = std::min(rec.best_fitness, ind.fitness);
    fitness_sum += ind.fitness;
  }
  rec.mean_fitness = fitness_sum / static_cast<double>(current.size());
  rec.unique_solution_fraction = unique_fraction(current, Chromosome::Solution);
  rec.unique_preference_fraction = unique_fraction(current, Chromosome::Preference);
  rec.mean_solution_depth = mean_depth(current, Chromosome::Solution);
  rec.mean_preference_depth = mean_depth(current, Chromosome::Preference);

  rec.role_fractions = role_fractions(role_flags);
  std::array<std::vector<double>, 4> depths_by_role;
  std::array<std::vector<double>, 4> fitness_by_role;
  for (std::size_t i = 0; i < role_population.size(); ++i) {
    const Individual& ind = role_population[i];
    const Role role = classify_role(role_flags[i]);
    const auto r = static_cast<std::size_t>(role);
    const int sol_depth = depth(ind.solution);
    const int pref_depth = depth(ind.preference);
    depths_by_role[r].push_back(sol_depth);
    fitness_by_role[r].push_back(ind.fitness);
    ++rec.depth_histograms[histogram_slot(role, Chromosome::Solution)]
                          [std::min(sol_depth, kDepthBuckets - 1)];
    ++rec.depth_histograms[histogram_slot(role, Chromosome::Preference)]
                          [std::min(pref_depth, kDepthBuckets - 1)];
  }
  for (std::size_t r = 0; r < 4; ++r) {
    if (depths_by_role[r].empty()) continue;
    rec.per_role_mean_depth[r] = mean_of(depths_by_role[r]);
    rec.per_role_best_fitness[r] = *std::min_element(fitness_by_role[r].begin(),
                                                     fitness_by_role[r].end());
  }
  return rec;
}

// JSONL schema.  Key order is fixed and documented: generation, fitness
// metrics, uniqueness, depths, role_fractions, per_role maps (null when the
// role is empty), depth_histograms keyed "<role>_<chromosome>", and
// improvement_events.
inline nlohmann::ordered_json to_json(const GenerationRecord& rec) {
  nlohmann::ordered_json j;
  j["generation"] = rec.generation;
  j["best_fitness"] = rec.best_fitness;
  j["mean_fitness"] = rec.mean_fitness;
  j["unique_solution_fraction"] = rec.unique_solution_fraction;
  j["unique_preference_fraction"] = rec.unique_preference_fraction;
  j["mean_solution_depth"] = rec.mean_solution_depth;
  j["mean_preference_depth"] = rec.mean_preference_depth;
  j["role_fractions"] = {{"chooser", rec.role_fractions.chooser},
                         {"courter", rec.role_fractions.courter},
                         {"both", rec.role_fractions.both},
                         {"unselected", rec.role_fractions.unselected}};
  nlohmann::ordered_json mean_depths, best_fits;
  for (Role role : kAllRoles) {
    const auto r = static_cast<std::size_t>(role);
    mean_depths[role_name(role)] =
        rec.per_role_mean_depth[r] ? nlohmann::ordered_json(*rec.per_role_mean_depth[r])
                                   : nlohmann::ordered_json(nullptr);
    best_fits[role_name(role)] =
        rec.per_role_best_fitness[r] ? nlohmann::ordered_json(*rec.per_role_best_fitness[r])
                                     : nlohmann::ordered_json(nullptr);
  }
  j["per_role_mean_depth"] = mean_depths;
  j["per_role_best_fitness"] = best_fits;
  nlohmann::ordered_json hists;
  for (Role role : kAllRoles)
    for (Chromosome ch : {Chromosome::Solution, Chromosome::Preference})
      hists[std::string(role_name(role)) + (ch == Chromosome::Solution ? "_solution" : "_preference")] =
          rec.depth_histograms[histogram_slot(role, ch)];
  j["depth_histograms"] = hists;
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const ImprovementEvent& e : rec.improvement_events)
    events.push_back({{"preference_depth", e.preference_depth}, {"is_best_ever", e.is_best_ever}});
  j["improvement_events"] = events;
  return j;
}

inline GenerationRecord generation_record_from_json(const nlohmann::json& j) {
  GenerationRecord rec;
  rec.generation = j.at("generation").get<int>();
  rec.best_fitness = j.at("best_fitness").get<double>();
  rec.mean_fitness = j.at("mean_fitness").get<double>();
  rec.unique_solution_fraction = j.at("unique_solution_fraction").get<double>();
  rec.unique_preference_fraction = j.at("unique_preference_fraction").get<double>();
  rec.mean_solution_depth = j.at("mean_solution_depth").get<double>();
  rec.mean_preference_depth = j.at("mean_preference_depth").get<double>();
  const auto& rf = j.at("role_fractions");
  rec.role_fractions = {rf.at("chooser").get<double>(), rf.at("courter").get<double>(),
                        rf.at("both").get<double>(), rf.at("unselected").get<double>()};
  for (Role role : kAllRoles) {
    const auto r = static_cast<std::size_t>(role);
    const auto& md = j.at("per_role_mean_depth").at(role_name(role));
    if (!md.is_null()) rec.per_role_mean_depth[r] = md.get<double>();
    const auto& bf = j.at("per_role_best_fitness").at(role_name(role));
    if (!bf.is_null()) rec.per_role_best_fitness[r] = bf.get<double>();
  }
  for (Role role : kAllRoles)
    for (Chromosome ch : {Chromosome::Solution, Chromosome::Preference}) {
      const std::string key =
          std::string(role_name(role)) + (ch == Chromosome::Solution ? "_solution" : "_preference");
      const auto& counts = j.at("depth_histograms").at(key);
      for (int d = 0; d < kDepthBuckets; ++d)
        rec.depth_histograms[histogram_slot(role, ch)][static_cast<std::size_t>(d)] =
            counts.at(static_cast<std::size_t>(d)).get<int>();
    }
  for (const auto& e : j.at("improvement_events"))
    rec.improvement_events.push_back(
        {e.at("preference_depth").get<int>(), e.at("is_best_ever").get<bool>()});
  return rec;
}

// Final-generation values of one run, the unit the batch tables aggregate.
struct RunFinals {
  int generations = 0;
  double final_best_fitness = 0.0;
  double unique_solution_fraction = 0.0;
  double unique_preference_fraction = 0.0;
  double mean_solution_depth = 0.0;
  double mean_preference_depth = 0.0;
  double wall_clock_seconds = 0.0;
};

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
};

struct BatchSummary {
  std::size_t runs = 0;
  std::vector<MetricSummary> rows;
};

// Termination-value means and sample deviations across a shared-seed batch.
// All runs must have the same generation count.
inline BatchSummary aggregate_batch(std::span<const RunFinals> finals) {
  if (finals.empty()) throw std::invalid_argument("cannot aggregate an empty batch");
  for (const RunFinals& f : finals)
    if (f.generations != finals.front().generations)
      throw std::invalid_argument("cannot aggregate runs with different generation counts");
  BatchSummary summary;
  summary.runs = finals.size();
  const auto add = [&](const char* name, auto pick) {
    std::vector<double> xs;
    xs.reserve(finals.size());
    for (const RunFinals& f : finals) xs.push_back(pick(f));
    summary.rows.push_back({name, mean_of(xs), sample_sd(xs)});
  };
  add("final_best_fitness", [](const RunFinals& f) { return f.final_best_fitness; });
  add("unique_solution_fraction", [](const RunFinals& f) { return f.unique_solution_fraction; });
  add("unique_preference_fraction",
      [](const RunFinals& f) { return f.unique_preference_fraction; });
  add("mean_solution_depth", [](const RunFinals& f) { return f.mean_solution_depth; });
  add("mean_preference_depth", [](const RunFinals& f) { return f.mean_preference_depth; });
  add("wall_clock_seconds", [](const RunFinals& f) { return f.wall_clock_seconds; });
  return summary;
}

}  // namespace pimpgp
