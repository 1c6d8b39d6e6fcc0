#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbcheck/flatten.hpp"

namespace sbcheck {

enum class Atom : std::uint8_t { Adapting = 1, Steady = 2, Progress = 4 };

/// Subset of {adapting, steady, progress}.
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr explicit LabelSet(std::uint8_t bits) : bits_(bits) {}

  constexpr bool has(Atom a) const noexcept { return (bits_ & static_cast<std::uint8_t>(a)) != 0; }
  constexpr void add(Atom a) noexcept { bits_ |= static_cast<std::uint8_t>(a); }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  bool empty() const noexcept { return bits_ == 0; }

  /// `{adapting, steady, progress}` in that order.
  std::string str() const;

  friend bool operator==(LabelSet, LabelSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

const char* to_string(Atom a);

/// Left-total labelled graph. One edge per flat transition, plus a self-loop
/// at every state that had none.
class Kripke {
 public:
  /// `edges` need not be left-total; sinks get a self-loop and are marked
  /// dead. Used directly for synthetic structures in tests.
  static Kripke from_edges(std::size_t n, StateIndex initial, std::vector<std::pair<StateIndex, StateIndex>> edges,
                           std::vector<LabelSet> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return succ_.size(); }
  StateIndex initial() const noexcept { return initial_; }

  std::span<const StateIndex> successors(StateIndex t) const {
    return {succ_.data() + succ_off_[t], succ_.data() + succ_off_[t + 1]};
  }
  std::span<const StateIndex> predecessors(StateIndex t) const {
    return {pred_.data() + pred_off_[t], pred_.data() + pred_off_[t + 1]};
  }
  LabelSet labels(StateIndex t) const { return labels_[t]; }
  /// True when the only edge of `t` is the added self-loop.
  bool dead(StateIndex t) const { return dead_[t] != 0; }
  std::size_t dead_count() const;

 private:
  std::size_t n_ = 0;
  StateIndex initial_ = 0;
  std::vector<std::uint32_t> succ_off_, pred_off_;
  std::vector<StateIndex> succ_, pred_;
  std::vector<LabelSet> labels_;
  std::vector<std::uint8_t> dead_;
};

Kripke to_kripke(const FlatLts& flat);

inline LabelSet labels_of(const Kripke& k, StateIndex t) { return k.labels(t); }

std::string kripke_to_dot(const SBSystem& sys, const FlatLts& flat, const Kripke& k);
std::string kripke_to_json(const SBSystem& sys, const FlatLts& flat, const Kripke& k);

}  // namespace sbcheck
