#pragma once

// Explicit-state CTL over the {adapting, steady, progress} Kripke structure.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sbcheck/kripke.hpp"

namespace sbcheck {

enum class CtlOp : std::uint8_t { True, False, Atom, Not, And, Or, Implies, EX, EU, AU };

struct CtlNode;

/// Core CTL formula. Derived operators are expanded on construction:
/// EF f = E[true U f], AF f = A[true U f], EG f = !AF !f, AG f = !EF !f,
/// AX f = !EX !f.
class Ctl {
 public:
  static Ctl top();
  static Ctl bottom();
  static Ctl atom(Atom a);
  static Ctl neg(Ctl f);
  static Ctl conj(Ctl a, Ctl b);
  static Ctl disj(Ctl a, Ctl b);
  static Ctl implies(Ctl a, Ctl b);
  static Ctl ex(Ctl f);
  static Ctl eu(Ctl a, Ctl b);
  static Ctl au(Ctl a, Ctl b);
  static Ctl ax(Ctl f);
  static Ctl ef(Ctl f);
  static Ctl af(Ctl f);
  static Ctl eg(Ctl f);
  static Ctl ag(Ctl f);

  CtlOp op() const noexcept;
  Atom atom_value() const noexcept;
  const Ctl& kid(std::size_t i) const;
  std::size_t arity() const noexcept;
  /// Nesting depth of the core AST (atoms and constants have depth 0).
  std::size_t depth() const;
  std::size_t size() const;

  friend bool operator==(const Ctl& a, const Ctl& b);

 private:
  explicit Ctl(std::shared_ptr<const CtlNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const CtlNode> node_;
};

struct CtlNode {
  CtlOp op;
  Atom atom = Atom::Progress;
  std::vector<Ctl> kids;
};

/// Grammar, loosest first: `=>` (right assoc), `||`, `&&`, then the prefix
/// operators `!`, `EX`, `AX`, `EF`, `AF`, `EG`, `AG`, and `E[f U g]`,
/// `A[f U g]`, `( f )`, `true`, `false`, atoms.
Ctl parse_ctl(std::string_view text);
/// Core syntax; `parse_ctl(to_string(f)) == f`.
std::string to_string(const Ctl& f);

/// (adapting => EF steady) && progress
Ctl weak_inner();
/// (adapting => AF steady) && progress
Ctl strong_inner();
/// EG weak_inner()
Ctl weak_formula();
/// AG strong_inner()
Ctl strong_formula();

/// One byte per Kripke state, 1 = member.
class SatSet {
 public:
  SatSet() = default;
  explicit SatSet(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}

  std::size_t size() const noexcept { return bits_.size(); }
  bool contains(StateIndex t) const { return bits_[t] != 0; }
  void set(StateIndex t, bool v = true) { bits_[t] = v ? 1 : 0; }
  std::size_t count() const;
  std::vector<StateIndex> indices() const;
  std::uint8_t* data() noexcept { return bits_.data(); }
  const std::uint8_t* data() const noexcept { return bits_.data(); }

  friend bool operator==(const SatSet&, const SatSet&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Linear-time labelling: EX by predecessor scan, E[U] by backward search,
/// A[U] by successor counting. Pointwise passes run under OpenMP.
SatSet sat_set(const Kripke& k, const Ctl& phi);
/// Plain Kleene iteration of the fixpoint characterisations, single-threaded.
SatSet sat_set_reference(const Kripke& k, const Ctl& phi);

bool holds_at(const Kripke& k, const Ctl& phi, StateIndex t);

struct Lasso {
  std::vector<StateIndex> prefix;
  std::vector<StateIndex> cycle;

  friend bool operator==(const Lasso&, const Lasso&) = default;
};

/// Lasso from `t` inside sat_set(inner), shortest prefix first. Throws
/// ContractError if `t` does not satisfy EG inner.
Lasso witness_eg(const Kripke& k, const Ctl& inner, StateIndex t);
/// Same, for a precomputed member set.
Lasso witness_eg(const Kripke& k, const SatSet& inner, StateIndex t);

/// Shortest path from `t` to a state outside sat_set(inner). Throws
/// ContractError if `t` satisfies AG inner.
std::vector<StateIndex> counterexample_ag(const Kripke& k, const Ctl& inner, StateIndex t);
std::vector<StateIndex> counterexample_ag(const Kripke& k, const SatSet& inner, StateIndex t);

/// True when `l` is a path of `k` from `t` with every state in `inner`.
bool lasso_valid(const Kripke& k, const Lasso& l, const SatSet& inner, StateIndex t);

}  // namespace sbcheck
