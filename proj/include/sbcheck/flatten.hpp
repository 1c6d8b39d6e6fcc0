#pragma once

// Flat semantics of an S[B] system: states (q, r, rho) where rho is either
// empty (steady) or a pending S transition (adapting).

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbcheck/model.hpp"

namespace sbcheck {

inline constexpr std::int32_t kSteady = -1;

struct FlatState {
  StateIndex q = 0;
  StateIndex r = 0;
  /// Index of the S transition being followed, or kSteady.
  std::int32_t phase = kSteady;

  bool steady() const noexcept { return phase == kSteady; }

  friend bool operator==(const FlatState&, const FlatState&) = default;
  friend auto operator<=>(const FlatState&, const FlatState&) = default;
};

/// SteadyIn(r) when `phase == kSteady`, otherwise AdaptPhase(r, psi, r') for
/// the S transition `phase`.
struct FlatLabel {
  StateIndex r = 0;
  std::int32_t phase = kSteady;

  bool steady() const noexcept { return phase == kSteady; }

  friend bool operator==(const FlatLabel&, const FlatLabel&) = default;
};

enum class FlatRule : std::uint8_t { Steady, AdaptStart, Adapt, AdaptEnd, AdaptStartEnd };

const char* to_string(FlatRule rule);

struct FlatSuccessor {
  FlatLabel label;
  FlatRule rule;
  FlatState target;

  friend bool operator==(const FlatSuccessor&, const FlatSuccessor&) = default;
};

struct FlatEdge {
  FlatLabel label;
  FlatRule rule;
  StateIndex target;

  friend bool operator==(const FlatEdge&, const FlatEdge&) = default;
};

/// Reachable flat transition system in canonical order: states sorted by
/// (q, r, phase key) where steady sorts first and adapting states follow
/// the order of their pending transition's (target, invariant text, index).
/// Successors of a state are sorted by (steady first, phase key, target).
struct FlatLts {
  std::vector<FlatState> states;
  StateIndex initial = 0;
  std::vector<std::uint32_t> offsets;  // CSR, size states.size() + 1
  std::vector<FlatEdge> edges;
  /// Rank of each S transition in the canonical phase order.
  std::vector<std::uint32_t> phase_rank;

  std::size_t size() const noexcept { return states.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }
  std::span<const FlatEdge> successors(StateIndex i) const {
    return {edges.data() + offsets[i], edges.data() + offsets[i + 1]};
  }
  std::optional<StateIndex> find(const FlatState& f) const;

  friend bool operator==(const FlatLts&, const FlatLts&) = default;
};

/// All pairs derivable from `f` by the five rules, deduplicated, in
/// canonical order. Evaluates formulas directly; no precomputation.
std::vector<FlatSuccessor> flat_successors(const SBSystem& sys, const FlatState& f);

/// Reachable closure from (q0, r0, steady). Satisfaction tables are filled
/// and each breadth-first level is expanded in parallel; the result does
/// not depend on the thread count.
FlatLts build_flat(const SBSystem& sys);
/// Same, seeded from an arbitrary flat state.
FlatLts build_flat(const SBSystem& sys, const FlatState& seed);

/// Single-threaded construction straight from flat_successors. Kept as the
/// reference the parallel build is tested against.
FlatLts build_flat_reference(const SBSystem& sys);
FlatLts build_flat_reference(const SBSystem& sys, const FlatState& seed);

/// (q, r, steady) has at least one flat successor.
bool progress(const SBSystem& sys, StateIndex q, StateIndex r);

/// Truth table of every S label and invariant over every B state:
/// `label(r, q)` and `invariant(t, q)`.
class SatTables {
 public:
  static SatTables compute(const SBSystem& sys);
  static SatTables compute_reference(const SBSystem& sys);

  bool label(StateIndex r, StateIndex q) const { return label_[std::size_t(r) * nq_ + q] != 0; }
  bool invariant(std::size_t t, StateIndex q) const { return inv_[t * nq_ + q] != 0; }

  friend bool operator==(const SatTables&, const SatTables&) = default;

 private:
  std::size_t nq_ = 0;
  std::vector<std::uint8_t> label_;
  std::vector<std::uint8_t> inv_;
};

/// Successor oracle for arbitrary flat states, backed by precomputed
/// satisfaction tables. Thread-safe for concurrent queries.
class FlatSemantics {
 public:
  explicit FlatSemantics(const SBSystem& sys);
  ~FlatSemantics();
  FlatSemantics(FlatSemantics&&) noexcept;
  FlatSemantics& operator=(FlatSemantics&&) noexcept;

  const SBSystem& system() const noexcept { return *sys_; }
  const SatTables& tables() const noexcept { return tables_; }
  /// Same result as flat_successors, in canonical order.
  void successors(const FlatState& f, std::vector<FlatSuccessor>& out) const;
  std::vector<FlatSuccessor> successors(const FlatState& f) const;
  std::span<const StateIndex> b_successors(StateIndex q) const;

 private:
  struct Graph;
  const SBSystem* sys_;
  SatTables tables_;
  std::unique_ptr<Graph> graph_;
  std::vector<std::uint32_t> rank_;
};

/// `((0,1,0), r4, {})` or `((0,1,0), r4, {(Ob > 0 && Oy == 0, r5)})`.
std::string render(const SBSystem& sys, const FlatState& f);
std::string render(const SBSystem& sys, const FlatLabel& l);

/// Graphviz rendering: steady states filled, adapting states hollow.
std::string flat_to_dot(const SBSystem& sys, const FlatLts& flat);
/// JSON with fixed key order: {system, initial, states:[...], transitions:[...]}.
std::string flat_to_json(const SBSystem& sys, const FlatLts& flat);

}  // namespace sbcheck
