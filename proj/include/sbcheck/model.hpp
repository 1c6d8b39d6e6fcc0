#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbcheck/constraints.hpp"

namespace sbcheck {

using StateIndex = std::uint32_t;

struct BState {
  std::string id;
  Observation obs;
};

/// Behavioural level: an unlabelled finite state machine.
struct BLevel {
  std::vector<BState> states;
  StateIndex initial = 0;
  std::vector<std::pair<StateIndex, StateIndex>> transitions;

  std::optional<StateIndex> find(std::string_view id) const;
};

struct SState {
  std::string id;
  Formula label;
};

struct STransition {
  StateIndex source;
  Formula invariant;
  StateIndex target;
};

/// Structural level: constraint-labelled states, invariant-labelled edges.
struct SLevel {
  std::vector<SState> states;
  StateIndex initial = 0;
  std::vector<STransition> transitions;

  std::optional<StateIndex> find(std::string_view id) const;
};

struct RuleUpdate {
  std::size_t observable;
  Formula expr;
};

/// `name: guard -> x := e, ...`; updates apply simultaneously.
struct GuardedRule {
  std::string name;
  Formula guard;
  std::vector<RuleUpdate> updates;
};

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Error;
  std::string message;
};

std::string to_string(const Diagnostic& d);

struct SBSystem {
  std::string name;
  Signature sig;
  BLevel b;
  SLevel s;
  /// Non-empty when the behaviour was given as guarded rules.
  std::vector<GuardedRule> rules;
  /// Lints produced while expanding rules (pruned out-of-range firings).
  std::vector<Diagnostic> lints;

  /// Index of the S transition `source -> target`; throws if absent or ambiguous.
  std::size_t s_transition(std::string_view source, std::string_view target) const;
  StateIndex b_index(std::string_view id) const;
  StateIndex s_index(std::string_view id) const;
};

/// Parses the model DSL. Rule-based behaviour is expanded automatically.
SBSystem parse_model(std::string_view text);
SBSystem load_model(const std::string& path);

/// Renders `sys` back into the DSL (explicit behaviour unless rules exist).
std::string print_model(const SBSystem& sys);

/// Least set of observations reachable from `init` by firing rules. States
/// are sorted by observation vector and named by their canonical tuple.
BLevel expand_rules(const std::vector<GuardedRule>& rules, const Signature& sig, const Observation& init,
                    std::vector<Diagnostic>* lints = nullptr);

/// Well-formedness: initial B state satisfies the initial S constraint,
/// formulas are well-sorted over the signature, graph references are sound.
std::vector<Diagnostic> validate(const SBSystem& sys);

}  // namespace sbcheck
