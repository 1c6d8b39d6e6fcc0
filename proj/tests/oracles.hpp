#pragma once

// Independent checkers shared by the unit tests and the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "sbcheck/adapt.hpp"
#include "sbcheck/ctl.hpp"
#include "sbcheck/flatten.hpp"
#include "sbcheck/kripke.hpp"

namespace testing {

using namespace sbcheck;

inline FlatState initial_state(const SBSystem& sys) { return {sys.b.initial, sys.s.initial, kSteady}; }

// Structural invariants of a flat LTS plus the state-space bound; returns
// one message per violation.
inline std::vector<std::string> flat_invariant_violations(const SBSystem& sys, const FlatLts& flat) {
  std::vector<std::string> bad;
  auto sat = [&](const Formula& phi, StateIndex q) { return evaluate(phi, sys.b.states[q].obs); };
  const std::size_t bound = sys.b.states.size() * (1 + sys.s.transitions.size()) * sys.s.states.size();
  if (flat.size() > bound) bad.push_back("state count exceeds bound");
  if (flat.states[flat.initial] != initial_state(sys)) bad.push_back("wrong initial state");
  for (StateIndex i = 0; i < flat.size(); ++i) {
    const FlatState& f = flat.states[i];
    const std::string where = render(sys, f);
    bool steady_out = false, adapt_out = false;
    for (const auto& e : flat.successors(i)) {
      const FlatState& g = flat.states[e.target];
      (e.label.steady() ? steady_out : adapt_out) = true;
      if (e.label.steady() != (e.rule == FlatRule::Steady)) bad.push_back("label kind mismatch at " + where);
      if (e.label.r != f.r) bad.push_back("label names the wrong S state at " + where);
      if (!e.label.steady() && sys.s.transitions[e.label.phase].source != f.r) bad.push_back("foreign phase at " + where);
      switch (e.rule) {
        case FlatRule::Steady:
          if (!f.steady() || !g.steady() || g.r != f.r) bad.push_back("bad steady step at " + where);
          break;
        case FlatRule::AdaptStart:
          if (!f.steady() || g.steady() || g.phase != e.label.phase || g.r != f.r)
            bad.push_back("bad phase start at " + where);
          break;
        case FlatRule::Adapt:
          if (f.steady() || g.phase != f.phase || g.r != f.r) bad.push_back("bad phase step at " + where);
          break;
        case FlatRule::AdaptEnd:
          if (f.steady() || !g.steady() || g.r != sys.s.transitions[f.phase].target)
            bad.push_back("bad phase end at " + where);
          break;
        case FlatRule::AdaptStartEnd:
          if (!f.steady() || !g.steady() || g.r != sys.s.transitions[e.label.phase].target)
            bad.push_back("bad one-step phase at " + where);
          break;
      }
    }
    if (f.steady()) {
      if (steady_out && adapt_out) bad.push_back("steady and adapting steps at " + where);
      if (!sat(sys.s.states[f.r].label, f.q)) bad.push_back("steady state violates its label: " + where);
    } else {
      if (steady_out) bad.push_back("steady step from adapting state " + where);
      const Formula& target_label = sys.s.states[sys.s.transitions[f.phase].target].label;
      bool reachable_end = false;
      for (const auto& [a, b] : sys.b.transitions) reachable_end |= a == f.q && sat(target_label, b);
      if (reachable_end) {
        for (const auto& e : flat.successors(i)) {
          if (e.rule != FlatRule::AdaptEnd) bad.push_back("phase does not end as soon as possible at " + where);
        }
      }
    }
  }
  return bad;
}


// ---------------------------------------------------------------- CTL

/// CTL with every operator kept explicit, evaluated by bounded path
/// enumeration rather than by fixpoints.
struct TestCtl {
  enum Op { True, False, Atom, Not, And, Or, Implies, EX, AX, EF, AF, EG, AG, EU, AU } op = True;
  sbcheck::Atom atom = sbcheck::Atom::Steady;
  std::vector<TestCtl> kids;
};

inline Ctl to_ctl(const TestCtl& f) {
  auto k = [&](std::size_t i) { return to_ctl(f.kids[i]); };
  switch (f.op) {
    case TestCtl::True: return Ctl::top();
    case TestCtl::False: return Ctl::bottom();
    case TestCtl::Atom: return Ctl::atom(f.atom);
    case TestCtl::Not: return Ctl::neg(k(0));
    case TestCtl::And: return Ctl::conj(k(0), k(1));
    case TestCtl::Or: return Ctl::disj(k(0), k(1));
    case TestCtl::Implies: return Ctl::implies(k(0), k(1));
    case TestCtl::EX: return Ctl::ex(k(0));
    case TestCtl::AX: return Ctl::ax(k(0));
    case TestCtl::EF: return Ctl::ef(k(0));
    case TestCtl::AF: return Ctl::af(k(0));
    case TestCtl::EG: return Ctl::eg(k(0));
    case TestCtl::AG: return Ctl::ag(k(0));
    case TestCtl::EU: return Ctl::eu(k(0), k(1));
    case TestCtl::AU: return Ctl::au(k(0), k(1));
  }
  return Ctl::top();
}

/// Surface syntax, fully parenthesised.
inline std::string to_text(const TestCtl& f) {
  auto k = [&](std::size_t i) { return to_text(f.kids[i]); };
  switch (f.op) {
    case TestCtl::True: return "true";
    case TestCtl::False: return "false";
    case TestCtl::Atom: return to_string(f.atom);
    case TestCtl::Not: return "!(" + k(0) + ")";
    case TestCtl::And: return "(" + k(0) + " && " + k(1) + ")";
    case TestCtl::Or: return "(" + k(0) + " || " + k(1) + ")";
    case TestCtl::Implies: return "(" + k(0) + " => " + k(1) + ")";
    case TestCtl::EX: return "EX (" + k(0) + ")";
    case TestCtl::AX: return "AX (" + k(0) + ")";
    case TestCtl::EF: return "EF (" + k(0) + ")";
    case TestCtl::AF: return "AF (" + k(0) + ")";
    case TestCtl::EG: return "EG (" + k(0) + ")";
    case TestCtl::AG: return "AG (" + k(0) + ")";
    case TestCtl::EU: return "E[" + k(0) + " U " + k(1) + "]";
    case TestCtl::AU: return "A[" + k(0) + " U " + k(1) + "]";
  }
  return {};
}

inline TestCtl random_ctl(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  TestCtl f;
  if (depth == 0 || pick(5) == 0) {
    const int c = pick(8);
    if (c == 0) {
      f.op = TestCtl::True;
    } else if (c == 1) {
      f.op = TestCtl::False;
    } else {
      f.op = TestCtl::Atom;
      static const sbcheck::Atom atoms[] = {sbcheck::Atom::Adapting, sbcheck::Atom::Steady, sbcheck::Atom::Progress};
      f.atom = atoms[pick(3)];
    }
    return f;
  }
  f.op = static_cast<TestCtl::Op>(TestCtl::Not + pick(12));
  const int arity = (f.op == TestCtl::And || f.op == TestCtl::Or || f.op == TestCtl::Implies || f.op == TestCtl::EU ||
                     f.op == TestCtl::AU)
                        ? 2
                        : 1;
  for (int i = 0; i < arity; ++i) f.kids.push_back(random_ctl(rng, depth - 1));
  return f;
}

/// Truth of `f` at every state. Temporal operators look at paths of at most
/// |states| steps, which suffices on a finite left-total structure.
inline std::vector<char> naive_sat(const Kripke& k, const TestCtl& f) {
  const std::size_t n = k.size();
  std::vector<char> out(n, 0);
  std::vector<std::vector<char>> kid;
  for (const auto& c : f.kids) kid.push_back(naive_sat(k, c));
  for (StateIndex t = 0; t < n; ++t) {
    switch (f.op) {
      case TestCtl::True: out[t] = 1; break;
      case TestCtl::False: out[t] = 0; break;
      case TestCtl::Atom: out[t] = k.labels(t).has(f.atom); break;
      case TestCtl::Not: out[t] = !kid[0][t]; break;
      case TestCtl::And: out[t] = kid[0][t] && kid[1][t]; break;
      case TestCtl::Or: out[t] = kid[0][t] || kid[1][t]; break;
      case TestCtl::Implies: out[t] = !kid[0][t] || kid[1][t]; break;
      case TestCtl::EX:
      case TestCtl::AX: {
        bool any = false, all = true;
        for (StateIndex s : k.successors(t)) {
          any |= kid[0][s] != 0;
          all &= kid[0][s] != 0;
        }
        out[t] = f.op == TestCtl::EX ? any : all;
        break;
      }
      default: break;
    }
  }
  std::vector<char> memo((n + 1) * n, 0);  // [d * n + t]: 0 unknown, 1 false, 2 true
  switch (f.op) {
    case TestCtl::EF:
    case TestCtl::AF:
    case TestCtl::EU:
    case TestCtl::AU: {
      // some/every path reaches the goal within n steps, f holding before it
      const bool exists = f.op == TestCtl::EF || f.op == TestCtl::EU;
      const bool guarded = f.op == TestCtl::EU || f.op == TestCtl::AU;
      const auto& goal = guarded ? kid[1] : kid[0];
      auto reach = [&](auto&& self, StateIndex t, std::size_t d) -> bool {
        char& m = memo[d * n + t];
        if (m) return m == 2;
        bool r;
        if (goal[t]) {
          r = true;
        } else if (d == 0 || (guarded && !kid[0][t])) {
          r = false;
        } else {
          r = !exists;
          for (StateIndex s : k.successors(t)) {
            const bool v = self(self, s, d - 1);
            if (exists && v) r = true;
            if (!exists && !v) r = false;
          }
        }
        m = r ? 2 : 1;
        return r;
      };
      for (StateIndex t = 0; t < n; ++t) out[t] = reach(reach, t, n);
      break;
    }
    case TestCtl::EG:
    case TestCtl::AG: {
      // some/every path keeps f for n + 1 states, so it revisits a state
      const bool exists = f.op == TestCtl::EG;
      auto keep = [&](auto&& self, StateIndex t, std::size_t d) -> bool {
        char& m = memo[d * n + t];
        if (m) return m == 2;
        bool r = kid[0][t] != 0;
        if (r && d > 0) {
          bool any = false, all = true;
          for (StateIndex s : k.successors(t)) {
            const bool v = self(self, s, d - 1);
            any |= v;
            all &= v;
          }
          r = exists ? any : all;
        }
        m = r ? 2 : 1;
        return r;
      };
      for (StateIndex t = 0; t < n; ++t) out[t] = keep(keep, t, n);
      break;
    }
    default: break;
  }
  return out;
}

inline Kripke random_kripke(std::mt19937_64& rng, std::size_t max_states = 12) {
  auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::size_t n = 1 + below(max_states);
  std::vector<std::pair<StateIndex, StateIndex>> edges;
  std::vector<LabelSet> labels;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t out = below(4);
    for (std::size_t i = 0; i < out; ++i) edges.push_back({StateIndex(t), StateIndex(below(n))});
    labels.push_back(LabelSet(std::uint8_t(below(8))));
  }
  return Kripke::from_edges(n, StateIndex(below(n)), std::move(edges), std::move(labels));
}

inline std::vector<char> to_bytes(const SatSet& s) {
  std::vector<char> out(s.size());
  for (StateIndex t = 0; t < s.size(); ++t) out[t] = s.contains(t);
  return out;
}

// ---------------------------------------------------------------- adaptability

struct EquivalenceReport {
  std::size_t steady_states = 0;
  std::size_t weak = 0;
  std::size_t strong = 0;
  std::size_t whole_system = 0;
  std::string first;
};

/// Compares relational membership with the weak and strong formulas at
/// every reachable steady state, plus strong_relation presence with the
/// strong formula at the initial state.
inline EquivalenceReport compare_relations_with_ctl(const SBSystem& sys) {
  EquivalenceReport rep;
  const Analysis a(sys);
  const AdaptRelation weak = weak_relation(sys);
  const AdaptRelation strong = strong_adaptability_relation(sys);
  const SatSet eq1 = sat_set(a.kripke, weak_formula());
  const SatSet eq2 = sat_set(a.kripke, strong_formula());
  auto note = [&](const std::string& what, const FlatState& f) {
    if (rep.first.empty()) rep.first = sys.name + ": " + what + " at " + render(sys, f);
  };
  for (StateIndex t = 0; t < a.flat.size(); ++t) {
    const FlatState& f = a.flat.states[t];
    if (!f.steady()) continue;
    ++rep.steady_states;
    if ((weak.count({f.q, f.r}) != 0) != eq1.contains(t)) {
      ++rep.weak;
      note("weak relation and weak formula disagree", f);
    }
    if ((strong.count({f.q, f.r}) != 0) != eq2.contains(t)) {
      ++rep.strong;
      note("strong relation and strong formula disagree", f);
    }
  }
  if (strong_relation(sys).has_value() != eq2.contains(a.kripke.initial())) {
    ++rep.whole_system;
    note("strong_relation presence and strong formula disagree", a.flat.states[a.kripke.initial()]);
  }
  return rep;
}

inline std::vector<StatePair> label_pairs(const SBSystem& sys) {
  std::vector<StatePair> out;
  for (StateIndex q = 0; q < sys.b.states.size(); ++q)
    for (StateIndex r = 0; r < sys.s.states.size(); ++r)
      if (evaluate(sys.s.states[r].label, sys.b.states[q].obs)) out.push_back({q, r});
  return out;
}

// Every subset of the label-satisfying pairs that the checker accepts.
inline std::vector<AdaptRelation> accepted_subsets(const SBSystem& sys, Mode mode) {
  const auto cand = label_pairs(sys);
  std::vector<AdaptRelation> out;
  for (std::uint32_t mask = 0; mask < (1u << cand.size()); ++mask) {
    AdaptRelation rel;
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (mask >> i & 1) rel.insert(cand[i]);
    const auto rep = mode == Mode::Weak ? is_weak_adaptation(sys, rel) : is_strong_adaptation(sys, rel);
    if (rep.ok) out.push_back(std::move(rel));
  }
  return out;
}

}  // namespace testing
