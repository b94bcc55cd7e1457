#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "pimpgp/expr.hpp"
#include "pimpgp/population.hpp"
#include "pimpgp/problems.hpp"
#include "pimpgp/rng.hpp"

namespace pimpgp {

// Both parents drawn by fitness tournaments.
struct TournamentBoth {
  int k = 5;
  friend bool operator==(const TournamentBoth&, const TournamentBoth&) = default;
};

// Mate choice: the first parent wins a fitness tournament, then picks its
// partner from a random candidate set by preference distance.
struct PimpSelection {
  int tournament_k = 5;
  int candidate_count = 5;
  friend bool operator==(const PimpSelection&, const PimpSelection&) = default;
};

using SelectionStrategy = std::variant<TournamentBoth, PimpSelection>;

inline void validate_selection(const SelectionStrategy& s) {
  if (const auto* t = std::get_if<TournamentBoth>(&s)) {
    if (t->k < 1) throw std::invalid_argument("tournament size must be at least 1");
  } else {
    const auto& p = std::get<PimpSelection>(s);
    if (p.tournament_k < 1) throw std::invalid_argument("tournament size must be at least 1");
    if (p.candidate_count < 1) throw std::invalid_argument("candidate count must be at least 1");
  }
}

// Per-individual selection log for one generation.
struct RoleFlags {
  bool chosen_by_tournament = false;
  bool chosen_by_mate_choice = false;
};

enum class Role : std::size_t { Chooser = 0, Courter = 1, Both = 2, Unselected = 3 };
inline constexpr std::array<Role, 4> kAllRoles = {Role::Chooser, Role::Courter, Role::Both,
                                                  Role::Unselected};

constexpr const char* role_name(Role r) {
  switch (r) {
    case Role::Chooser: return "chooser";
    case Role::Courter: return "courter";
    case Role::Both: return "both";
    case Role::Unselected: return "unselected";
  }
  return "?";
}

// Chooser: tournament only.  Courter: mate choice only.  Both: both flags.
constexpr Role classify_role(RoleFlags f) {
  if (f.chosen_by_tournament && f.chosen_by_mate_choice) return Role::Both;
  if (f.chosen_by_tournament) return Role::Chooser;
  if (f.chosen_by_mate_choice) return Role::Courter;
  return Role::Unselected;
}

struct RoleFractions {
  double chooser = 0.0;
  double courter = 0.0;
  double both = 0.0;
  double unselected = 0.0;

  double of(Role r) const {
    switch (r) {
      case Role::Chooser: return chooser;
      case Role::Courter: return courter;
      case Role::Both: return both;
      case Role::Unselected: return unselected;
    }
    return 0.0;
  }
};

// Fractions over one generation's complete selection log; they sum to 1.
inline RoleFractions role_fractions(std::span<const RoleFlags> flags) {
  if (flags.empty()) throw std::invalid_argument("role fractions need a non-empty log");
  std::array<std::size_t, 4> counts{};
  for (const RoleFlags& f : flags) ++counts[static_cast<std::size_t>(classify_role(f))];
  const auto n = static_cast<double>(flags.size());
  return RoleFractions{static_cast<double>(counts[0]) / n, static_cast<double>(counts[1]) / n,
                       static_cast<double>(counts[2]) / n, static_cast<double>(counts[3]) / n};
}

// Samples k members uniformly with replacement and returns the index of the
// best (lowest fitness).  Ties keep the first winner met in sampling order.
template <RandomSource R>
std::size_t tournament(const Population& pop, int k, R& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament over an empty population");
  std::size_t best = rng.uniform_index(pop.size());
  for (int i = 1; i < k; ++i) {
    const std::size_t contender = rng.uniform_index(pop.size());
    if (pop[contender].fitness < pop[best].fitness) best = contender;
  }
  return best;
}

// How well a candidate's solution matches a preference: MSE between the two
// trees' outputs over the fitness cases, preference outputs as targets.
inline double preference_distance(const ExprTree& preference, const ExprTree& candidate_solution,
                                  const FitnessCases& cases) {
  Evaluator eval;
  const std::vector<double> want = eval.run(preference, cases.columns, cases.size());
  const std::vector<double> got = eval.run(candidate_solution, cases.columns, cases.size());
  return mean_squared_error(got, want);
}

// Mate-choice pair selection over cached semantics.  parent1 wins a fitness
// tournament; candidate_count members are sampled uniformly with replacement
// (self-candidacy allowed) and parent2 is the candidate whose solution
// outputs sit closest to parent1's preference outputs.  Ties keep the first
// winner in sampling order.  Requires semantics and preference_semantics
// cached on every member.
template <RandomSource R>
std::pair<std::size_t, std::size_t> pimp_select_pair(const Population& pop,
                                                     const PimpSelection& strategy, R& rng,
                                                     std::vector<RoleFlags>& roles) {
  const std::size_t parent1 = tournament(pop, strategy.tournament_k, rng);
  const std::vector<double>& want = pop[parent1].preference_semantics;
  std::size_t parent2 = rng.uniform_index(pop.size());
  double best_distance = mean_squared_error(pop[parent2].semantics, want);
  for (int i = 1; i < strategy.candidate_count; ++i) {
    const std::size_t candidate = rng.uniform_index(pop.size());
    const double d = mean_squared_error(pop[candidate].semantics, want);
    if (d < best_distance) {
      best_distance = d;
      parent2 = candidate;
    }
  }
  roles[parent1].chosen_by_tournament = true;
  roles[parent2].chosen_by_mate_choice = true;
  return {parent1, parent2};
}

// Strategy dispatch: one parent pair plus role bookkeeping.  Under
// TournamentBoth each parent is an independent tournament winner and both
// count as tournament selections.
template <RandomSource R>
std::pair<std::size_t, std::size_t> select_pair(const Population& pop,
                                                const SelectionStrategy& strategy, R& rng,
                                                std::vector<RoleFlags>& roles) {
  if (const auto* t = std::get_if<TournamentBoth>(&strategy)) {
    const std::size_t a = tournament(pop, t->k, rng);
    const std::size_t b = tournament(pop, t->k, rng);
    roles[a].chosen_by_tournament = true;
    roles[b].chosen_by_tournament = true;
    return {a, b};
  }
  return pimp_select_pair(pop, std::get<PimpSelection>(strategy), rng, roles);
}

}  // namespace pimpgp
