#pragma once

// Weak and strong adaptability, decided two ways: by CTL over the Kripke
// structure and by direct construction of adaptation relations.

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sbcheck/ctl.hpp"
#include "sbcheck/flatten.hpp"
#include "sbcheck/kripke.hpp"

namespace sbcheck {

enum class Mode { Weak, Strong };

const char* to_string(Mode m);

struct StatePair {
  StateIndex q = 0;
  StateIndex r = 0;

  friend bool operator==(const StatePair&, const StatePair&) = default;
  friend auto operator<=>(const StatePair&, const StatePair&) = default;
};

using AdaptRelation = std::set<StatePair>;

/// Flat LTS and Kripke structure of one system, built once and shared.
struct Analysis {
  const SBSystem* sys;
  FlatLts flat;
  Kripke kripke;

  explicit Analysis(const SBSystem& s);
  Analysis(const SBSystem& s, const FlatState& seed);
};

/// Evidence is a path of flat states. A non-empty `cycle` repeats forever
/// after `prefix`; an empty one means the path stops at a dead state.
struct Verdict {
  Mode mode = Mode::Weak;
  bool holds = false;
  std::vector<FlatState> prefix;
  std::vector<FlatState> cycle;
  std::optional<AdaptRelation> relation;
};

/// EG((adapting => EF steady) && progress) at the initial state.
Verdict check_weak(const SBSystem& sys);
Verdict check_weak(const Analysis& a);
/// AG((adapting => AF steady) && progress) at the initial state. A failing
/// verdict's path ends at a dead state or loops through non-steady states.
Verdict check_strong(const SBSystem& sys);
Verdict check_strong(const Analysis& a);
Verdict check(const Analysis& a, Mode mode);

/// Largest weak adaptation relation over the whole Q x R grid.
AdaptRelation weak_relation(const SBSystem& sys);
/// Largest strong adaptation relation over the whole Q x R grid.
AdaptRelation strong_adaptability_relation(const SBSystem& sys);
/// Steady pairs reachable from the initial state, returned only when they
/// form a strong adaptation relation.
std::optional<AdaptRelation> strong_relation(const SBSystem& sys);
AdaptRelation reachable_steady_pairs(const FlatLts& flat);

struct Violation {
  StatePair pair;
  /// 1, 2 or 3 for the failed clause.
  int clause = 0;
  std::string message;
};

struct RelationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

RelationReport is_weak_adaptation(const SBSystem& sys, const AdaptRelation& rel);
RelationReport is_strong_adaptation(const SBSystem& sys, const AdaptRelation& rel);

/// weak_formula() or strong_formula() at (q, r, steady), flattening from that state. Throws
/// ContractError when q does not satisfy L(r).
bool state_adaptable(const SBSystem& sys, StateIndex q, StateIndex r, Mode mode);

/// What one steady pair can do in one step or one adaptation phase.
struct PairMoves {
  bool label = false;
  bool progress = false;
  /// Targets of Steady steps.
  std::vector<StatePair> steady;
  /// Whether any adapting transition leaves (q, r, steady).
  bool adapts = false;
  /// Steady pairs where some adaptation phase from (q, r, steady) ends.
  std::vector<StatePair> phase_ends;
  /// Every adaptation path from (q, r, steady) is finite and ends steady.
  bool phases_terminate = true;
  /// Explanation when phases_terminate is false.
  std::string phase_problem;
};

PairMoves pair_moves(const FlatSemantics& sem, StateIndex q, StateIndex r);

std::string render(const SBSystem& sys, const StatePair& p);

/// {system, mode, holds, relation, evidence: {prefix, cycle}} in that order.
std::string verdict_to_json(const SBSystem& sys, const Verdict& v);
std::string verdict_to_text(const SBSystem& sys, const Verdict& v);
/// [["q","r"], ...]
std::string relation_to_json(const SBSystem& sys, const AdaptRelation& rel);
/// Accepts `[["q","r"], ...]` or `{"relation": [...]}`; ids are resolved
/// against `sys`.
AdaptRelation relation_from_json(const SBSystem& sys, const std::string& text);

}  // namespace sbcheck
