#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pimpgp/engine.hpp"

namespace pimpgp {

// Declarative config file handling.  Every key mirrors a RunConfig field;
// unknown keys are rejected so typos fail loudly instead of silently keeping
// a default.

namespace detail {

inline void require_known_keys(const nlohmann::json& j, const std::set<std::string>& known,
                               const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (known.count(it.key()) == 0)
      throw ConfigError(scope.empty() ? it.key() : scope + "." + it.key(), "unknown field");
}

template <class T>
T field_as(const nlohmann::json& j, const std::string& key, const std::string& scope) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(scope.empty() ? key : scope + "." + key, "wrong type or missing");
  }
}

template <class T>
void maybe_read(const nlohmann::json& j, const std::string& key, T& out,
                const std::string& scope = {}) {
  if (j.contains(key)) out = field_as<T>(j, key, scope);
}

}  // namespace detail

inline ProblemId problem_from_name(const std::string& name) {
  if (name == "koza1") return ProblemId::Koza1;
  if (name == "nguyen6") return ProblemId::Nguyen6;
  if (name == "pagie1") return ProblemId::Pagie1;
  if (name == "diabetes") return ProblemId::Diabetes;
  throw ConfigError("problem", "unknown problem '" + name +
                                   "' (expected koza1, nguyen6, pagie1, or diabetes)");
}

inline SelectionStrategy selection_from_json(const nlohmann::json& j,
                                             const std::string& scope = "selection") {
  if (!j.is_object()) throw ConfigError(scope, "must be an object with a 'kind'");
  const auto kind = detail::field_as<std::string>(j, "kind", scope);
  if (kind == "pimp") {
    detail::require_known_keys(j, {"kind", "tournament_k", "candidate_count"}, scope);
    PimpSelection s;
    detail::maybe_read(j, "tournament_k", s.tournament_k, scope);
    detail::maybe_read(j, "candidate_count", s.candidate_count, scope);
    return s;
  }
  if (kind == "tournament") {
    detail::require_known_keys(j, {"kind", "k"}, scope);
    TournamentBoth s;
    detail::maybe_read(j, "k", s.k, scope);
    return s;
  }
  throw ConfigError(scope + ".kind", "unknown selection kind '" + kind + "'");
}

inline nlohmann::ordered_json selection_to_json(const SelectionStrategy& s) {
  if (const auto* p = std::get_if<PimpSelection>(&s))
    return {{"kind", "pimp"},
            {"tournament_k", p->tournament_k},
            {"candidate_count", p->candidate_count}};
  const auto& t = std::get<TournamentBoth>(s);
  return {{"kind", "tournament"}, {"k", t.k}};
}

inline LeafMutation leaf_mutation_from_json(const nlohmann::json& j, const std::string& scope) {
  if (!j.is_object()) throw ConfigError(scope, "must be an object with a 'kind'");
  const auto kind = detail::field_as<std::string>(j, "kind", scope);
  if (kind == "subtree") {
    detail::require_known_keys(j, {"kind", "grow_min", "grow_max"}, scope);
    SubtreeMutation m;
    detail::maybe_read(j, "grow_min", m.grow_min, scope);
    detail::maybe_read(j, "grow_max", m.grow_max, scope);
    return m;
  }
  if (kind == "node_replacement") {
    detail::require_known_keys(j, {"kind", "per_node_prob"}, scope);
    NodeReplacementMutation m;
    detail::maybe_read(j, "per_node_prob", m.per_node_prob, scope);
    return m;
  }
  if (kind == "none") {
    detail::require_known_keys(j, {"kind"}, scope);
    return NoMutation{};
  }
  throw ConfigError(scope + ".kind", "unknown mutation kind '" + kind + "'");
}

inline MutationStrategy mutation_from_json(const nlohmann::json& j,
                                           const std::string& scope = "mutation") {
  if (j.is_object() && j.contains("kind") && j.at("kind") == "hybrid") {
    detail::require_known_keys(j, {"kind", "phases"}, scope);
    if (!j.contains("phases") || !j.at("phases").is_array())
      throw ConfigError(scope + ".phases", "hybrid mutation needs a phase array");
    HybridMutation h;
    std::size_t i = 0;
    for (const auto& pj : j.at("phases")) {
      const std::string pscope = scope + ".phases[" + std::to_string(i) + "]";
      detail::require_known_keys(pj, {"from", "to", "strategy"}, pscope);
      HybridPhase phase;
      phase.from_gen = detail::field_as<int>(pj, "from", pscope);
      phase.to_gen = detail::field_as<int>(pj, "to", pscope);
      if (!pj.contains("strategy")) throw ConfigError(pscope + ".strategy", "missing");
      phase.strategy = leaf_mutation_from_json(pj.at("strategy"), pscope + ".strategy");
      h.phases.push_back(std::move(phase));
      ++i;
    }
    return h;
  }
  const LeafMutation leaf = leaf_mutation_from_json(j, scope);
  return std::visit([](const auto& m) { return MutationStrategy(m); }, leaf);
}

inline nlohmann::ordered_json leaf_mutation_to_json(const LeafMutation& m) {
  if (const auto* s = std::get_if<SubtreeMutation>(&m))
    return {{"kind", "subtree"}, {"grow_min", s->grow_min}, {"grow_max", s->grow_max}};
  if (const auto* n = std::get_if<NodeReplacementMutation>(&m))
    return {{"kind", "node_replacement"}, {"per_node_prob", n->per_node_prob}};
  return {{"kind", "none"}};
}

inline nlohmann::ordered_json mutation_to_json(const MutationStrategy& m) {
  if (const auto* h = std::get_if<HybridMutation>(&m)) {
    nlohmann::ordered_json phases = nlohmann::ordered_json::array();
    for (const HybridPhase& p : h->phases)
      phases.push_back({{"from", p.from_gen},
                        {"to", p.to_gen},
                        {"strategy", leaf_mutation_to_json(p.strategy)}});
    return {{"kind", "hybrid"}, {"phases", phases}};
  }
  return std::visit(
      [](const auto& leaf) {
        if constexpr (std::is_same_v<std::decay_t<decltype(leaf)>, HybridMutation>)
          return nlohmann::ordered_json();
        else
          return leaf_mutation_to_json(LeafMutation(leaf));
      },
      m);
}

inline CaseSource case_source_from_json(const nlohmann::json& j,
                                        const std::string& scope = "cases") {
  if (!j.is_object()) throw ConfigError(scope, "must be an object with a 'kind'");
  const auto kind = detail::field_as<std::string>(j, "kind", scope);
  if (kind == "sampled") {
    detail::require_known_keys(j, {"kind", "count", "low", "high"}, scope);
    SampledUniform s;
    detail::maybe_read(j, "count", s.count, scope);
    detail::maybe_read(j, "low", s.low, scope);
    detail::maybe_read(j, "high", s.high, scope);
    return s;
  }
  if (kind == "grid") {
    detail::require_known_keys(j, {"kind", "low", "high", "step"}, scope);
    Grid g;
    detail::maybe_read(j, "low", g.low, scope);
    detail::maybe_read(j, "high", g.high, scope);
    detail::maybe_read(j, "step", g.step, scope);
    return g;
  }
  if (kind == "dataset") {
    detail::require_known_keys(j, {"kind", "path"}, scope);
    Dataset d;
    d.path = detail::field_as<std::string>(j, "path", scope);
    return d;
  }
  throw ConfigError(scope + ".kind", "unknown case source kind '" + kind + "'");
}

inline nlohmann::ordered_json case_source_to_json(const CaseSource& c) {
  if (const auto* s = std::get_if<SampledUniform>(&c))
    return {{"kind", "sampled"}, {"count", s->count}, {"low", s->low}, {"high", s->high}};
  if (const auto* g = std::get_if<Grid>(&c))
    return {{"kind", "grid"}, {"low", g->low}, {"high", g->high}, {"step", g->step}};
  return {{"kind", "dataset"}, {"path", std::get<Dataset>(c).path}};
}

// Parses a full run config.  Every field is optional and defaults to the
// standard table values; the diabetes problem defaults to 500 generations
// when none are given.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  detail::require_known_keys(
      j,
      {"problem", "dataset_path", "population_size", "generations", "seed", "crossover_prob",
       "mutation_prob", "max_depth", "init_depth_min", "init_depth_max", "selection", "mutation",
       "cases", "snapshot_every"},
      {});
  RunConfig cfg;
  if (j.contains("problem"))
    cfg.problem = problem_from_name(detail::field_as<std::string>(j, "problem", {}));
  if (cfg.problem == ProblemId::Diabetes && !j.contains("generations")) cfg.generations = 500;
  detail::maybe_read(j, "dataset_path", cfg.dataset_path);
  detail::maybe_read(j, "population_size", cfg.population_size);
  detail::maybe_read(j, "generations", cfg.generations);
  detail::maybe_read(j, "seed", cfg.seed);
  detail::maybe_read(j, "crossover_prob", cfg.crossover_prob);
  detail::maybe_read(j, "mutation_prob", cfg.mutation_prob);
  detail::maybe_read(j, "max_depth", cfg.max_depth);
  detail::maybe_read(j, "init_depth_min", cfg.init_depth_min);
  detail::maybe_read(j, "init_depth_max", cfg.init_depth_max);
  detail::maybe_read(j, "snapshot_every", cfg.snapshot_every);
  if (j.contains("selection")) cfg.selection = selection_from_json(j.at("selection"));
  if (j.contains("mutation")) cfg.mutation = mutation_from_json(j.at("mutation"));
  if (j.contains("cases")) cfg.case_source_override = case_source_from_json(j.at("cases"));
  return cfg;
}

// Fully resolved form: every field explicit, stable key order.  Feeding the
// output back through run_config_from_json reproduces the config exactly.
inline nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["problem"] = problem_name(cfg.problem);
  j["dataset_path"] = cfg.dataset_path;
  j["population_size"] = cfg.population_size;
  j["generations"] = cfg.generations;
  j["seed"] = cfg.seed;
  j["crossover_prob"] = cfg.crossover_prob;
  j["mutation_prob"] = cfg.mutation_prob;
  j["max_depth"] = cfg.max_depth;
  j["init_depth_min"] = cfg.init_depth_min;
  j["init_depth_max"] = cfg.init_depth_max;
  j["selection"] = selection_to_json(cfg.selection);
  j["mutation"] = mutation_to_json(cfg.mutation);
  if (cfg.case_source_override) j["cases"] = case_source_to_json(*cfg.case_source_override);
  j["snapshot_every"] = cfg.snapshot_every;
  return j;
}

inline std::string selection_label(const SelectionStrategy& s) {
  return std::holds_alternative<PimpSelection>(s) ? "pimp" : "tournament";
}

inline std::string mutation_label(const MutationStrategy& m) {
  if (std::holds_alternative<SubtreeMutation>(m)) return "subtree";
  if (std::holds_alternative<NodeReplacementMutation>(m)) return "node_replacement";
  if (std::holds_alternative<NoMutation>(m)) return "none";
  return "hybrid";
}

// One experiment matrix: the cross product of problems, selection
// strategies, and mutation strategies, each cell run over the shared seeds.
struct ExperimentSpec {
  std::vector<ProblemId> problems;
  std::vector<SelectionStrategy> strategies;
  std::vector<MutationStrategy> mutations;
  std::vector<std::uint64_t> seeds;   // shared across every cell
  RunConfig base;                     // per-run defaults and overrides
  bool generations_overridden = false;
  std::string output_dir = "runs";
};

struct ExperimentCell {
  std::string name;  // "<problem>_<selection>_<mutation>"
  RunConfig config;  // seed left at 0; the harness sets it per run
};

inline ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("spec", "top level must be an object");
  detail::require_known_keys(
      j, {"problems", "strategies", "mutations", "seeds", "overrides", "output_dir"}, {});
  ExperimentSpec spec;
  if (!j.contains("problems") || !j.at("problems").is_array() || j.at("problems").empty())
    throw ConfigError("problems", "need a non-empty problem list");
  for (const auto& p : j.at("problems"))
    spec.problems.push_back(problem_from_name(p.get<std::string>()));

  if (!j.contains("strategies") || !j.at("strategies").is_array() || j.at("strategies").empty())
    throw ConfigError("strategies", "need a non-empty selection strategy list");
  std::size_t i = 0;
  for (const auto& s : j.at("strategies"))
    spec.strategies.push_back(selection_from_json(s, "strategies[" + std::to_string(i++) + "]"));

  if (!j.contains("mutations") || !j.at("mutations").is_array() || j.at("mutations").empty())
    throw ConfigError("mutations", "need a non-empty mutation strategy list");
  i = 0;
  for (const auto& m : j.at("mutations"))
    spec.mutations.push_back(mutation_from_json(m, "mutations[" + std::to_string(i++) + "]"));

  if (j.contains("seeds")) {
    const auto& sj = j.at("seeds");
    if (sj.is_array()) {
      for (const auto& s : sj) spec.seeds.push_back(s.get<std::uint64_t>());
    } else if (sj.is_object()) {
      detail::require_known_keys(sj, {"from", "to"}, "seeds");
      const auto from = detail::field_as<std::uint64_t>(sj, "from", "seeds");
      const auto to = detail::field_as<std::uint64_t>(sj, "to", "seeds");
      if (to < from) throw ConfigError("seeds", "range is empty");
      for (std::uint64_t s = from; s <= to; ++s) spec.seeds.push_back(s);
    } else {
      throw ConfigError("seeds", "must be a list or a {from, to} range");
    }
    if (spec.seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  } else {
    for (std::uint64_t s = 0; s < 30; ++s) spec.seeds.push_back(s);
  }

  if (j.contains("overrides")) {
    const auto& ov = j.at("overrides");
    detail::require_known_keys(ov,
                               {"dataset_path", "population_size", "generations", "seed",
                                "crossover_prob", "mutation_prob", "max_depth", "init_depth_min",
                                "init_depth_max", "cases", "snapshot_every"},
                               "overrides");
    detail::maybe_read(ov, "dataset_path", spec.base.dataset_path, "overrides");
    detail::maybe_read(ov, "population_size", spec.base.population_size, "overrides");
    if (ov.contains("generations")) {
      spec.base.generations = detail::field_as<int>(ov, "generations", "overrides");
      spec.generations_overridden = true;
    }
    detail::maybe_read(ov, "crossover_prob", spec.base.crossover_prob, "overrides");
    detail::maybe_read(ov, "mutation_prob", spec.base.mutation_prob, "overrides");
    detail::maybe_read(ov, "max_depth", spec.base.max_depth, "overrides");
    detail::maybe_read(ov, "init_depth_min", spec.base.init_depth_min, "overrides");
    detail::maybe_read(ov, "init_depth_max", spec.base.init_depth_max, "overrides");
    detail::maybe_read(ov, "snapshot_every", spec.base.snapshot_every, "overrides");
    if (ov.contains("cases"))
      spec.base.case_source_override = case_source_from_json(ov.at("cases"), "overrides.cases");
  }
  detail::maybe_read(j, "output_dir", spec.output_dir);
  return spec;
}

// Expands the matrix.  Diabetes cells default to 500 generations unless the
// spec overrode the count explicitly.
inline std::vector<ExperimentCell> expand_experiment(const ExperimentSpec& spec) {
  std::vector<ExperimentCell> cells;
  for (const ProblemId problem : spec.problems)
    for (const SelectionStrategy& sel : spec.strategies)
      for (const MutationStrategy& mut : spec.mutations) {
        ExperimentCell cell;
        cell.config = spec.base;
        cell.config.problem = problem;
        cell.config.selection = sel;
        cell.config.mutation = mut;
        if (problem == ProblemId::Diabetes && !spec.generations_overridden)
          cell.config.generations = 500;
        cell.name = std::string(problem_name(problem)) + "_" + selection_label(sel) + "_" +
                    mutation_label(mut);
        validate_config(cell.config);
        cells.push_back(std::move(cell));
      }
  return cells;
}

}  // namespace pimpgp
