#include "sbcheck/adapt.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

#include <json.hpp>

namespace sbcheck {

const char* to_string(Mode m) { return m == Mode::Weak ? "weak" : "strong"; }

std::string render(const SBSystem& sys, const StatePair& p) {
  return "(" + sys.b.states[p.q].id + ", " + sys.s.states[p.r].id + ")";
}

Analysis::Analysis(const SBSystem& s) : sys(&s), flat(build_flat(s)), kripke(to_kripke(flat)) {}

Analysis::Analysis(const SBSystem& s, const FlatState& seed)
    : sys(&s), flat(build_flat(s, seed)), kripke(to_kripke(flat)) {}

// ---------------------------------------------------------------- CTL side

namespace {

// Turns a finite path ending at a state that violates the inner formula
// into evidence: either it stops at a dead state or it continues into a
// loop that never becomes steady.
void extend_failure(const Analysis& a, std::vector<StateIndex> path, Verdict& v) {
  const Kripke& k = a.kripke;
  auto to_flat = [&](const std::vector<StateIndex>& xs) {
    std::vector<FlatState> out;
    for (StateIndex x : xs) out.push_back(a.flat.states[x]);
    return out;
  };
  const StateIndex bad = path.back();
  if (k.dead(bad)) {
    v.prefix = to_flat(path);
    return;
  }
  // A dead end reachable without passing a steady state is the plainest
  // explanation, so look for one before settling for a loop.
  std::vector<StateIndex> parent(k.size(), UINT32_MAX);
  std::queue<StateIndex> work;
  parent[bad] = bad;
  work.push(bad);
  while (!work.empty()) {
    const StateIndex u = work.front();
    work.pop();
    if (k.dead(u)) {
      std::vector<StateIndex> tail{u};
      while (tail.back() != bad) tail.push_back(parent[tail.back()]);
      path.pop_back();
      path.insert(path.end(), tail.rbegin(), tail.rend());
      v.prefix = to_flat(path);
      return;
    }
    for (StateIndex w : k.successors(u)) {
      if (parent[w] == UINT32_MAX && !k.labels(w).has(Atom::Steady)) {
        parent[w] = u;
        work.push(w);
      }
    }
  }

  SatSet unsteady(k.size());
  for (StateIndex t = 0; t < k.size(); ++t) unsteady.set(t, !k.labels(t).has(Atom::Steady));
  Lasso tail = witness_eg(k, unsteady, bad);
  path.pop_back();
  path.insert(path.end(), tail.prefix.begin(), tail.prefix.end());
  if (tail.cycle.size() == 1 && k.dead(tail.cycle.front())) {
    path.push_back(tail.cycle.front());
    tail.cycle.clear();
  }
  v.prefix = to_flat(path);
  v.cycle = to_flat(tail.cycle);
}

}  // namespace

Verdict check(const Analysis& a, Mode mode) {
  const Kripke& k = a.kripke;
  const Ctl inner = mode == Mode::Weak ? weak_inner() : strong_inner();
  const Ctl whole = mode == Mode::Weak ? Ctl::eg(inner) : Ctl::ag(inner);
  const SatSet in = sat_set(k, inner);
  const StateIndex t0 = k.initial();

  Verdict v;
  v.mode = mode;
  v.holds = sat_set(k, whole).contains(t0);
  if (v.holds) {
    // AG inner implies EG inner on a left-total structure.
    Lasso l = witness_eg(k, in, t0);
    for (StateIndex x : l.prefix) v.prefix.push_back(a.flat.states[x]);
    for (StateIndex x : l.cycle) v.cycle.push_back(a.flat.states[x]);
  } else {
    extend_failure(a, counterexample_ag(k, in, t0), v);
  }
  return v;
}

Verdict check_weak(const Analysis& a) { return check(a, Mode::Weak); }
Verdict check_strong(const Analysis& a) { return check(a, Mode::Strong); }
Verdict check_weak(const SBSystem& sys) { return check(Analysis(sys), Mode::Weak); }
Verdict check_strong(const SBSystem& sys) { return check(Analysis(sys), Mode::Strong); }

bool state_adaptable(const SBSystem& sys, StateIndex q, StateIndex r, Mode mode) {
  if (q >= sys.b.states.size() || r >= sys.s.states.size()) throw ContractError("state pair out of range");
  if (!evaluate(sys.s.states[r].label, sys.b.states[q].obs)) {
    throw ContractError("B state '" + sys.b.states[q].id + "' does not satisfy the constraints of S state '" +
                        sys.s.states[r].id + "'");
  }
  Analysis a(sys, FlatState{q, r, kSteady});
  return check(a, mode).holds;
}

// ---------------------------------------------------------------- relational side

PairMoves pair_moves(const FlatSemantics& sem, StateIndex q, StateIndex r) {
  const SBSystem& sys = sem.system();
  PairMoves m;
  m.label = sem.tables().label(r, q);
  std::vector<FlatSuccessor> succ;
  sem.successors(FlatState{q, r, kSteady}, succ);
  m.progress = !succ.empty();

  std::set<StatePair> ends;
  const std::uint64_t nt = sys.s.transitions.size();
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  std::vector<FlatState> nodes;
  std::vector<std::vector<std::uint32_t>> adj;
  auto node = [&](const FlatState& f) {
    auto [it, fresh] = index.emplace(std::uint64_t{f.q} * nt + static_cast<std::uint64_t>(f.phase),
                                     static_cast<std::uint32_t>(nodes.size()));
    if (fresh) {
      nodes.push_back(f);
      adj.emplace_back();
    }
    return it->second;
  };

  for (const auto& s : succ) {
    if (s.label.steady()) {
      m.steady.push_back({s.target.q, s.target.r});
      continue;
    }
    m.adapts = true;
    if (s.target.steady()) {
      ends.insert({s.target.q, s.target.r});
    } else {
      node(s.target);
    }
  }

  std::vector<FlatSuccessor> step;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    sem.successors(nodes[i], step);
    if (step.empty() && m.phases_terminate) {
      m.phases_terminate = false;
      m.phase_problem = "adaptation stops at dead state " + render(sys, nodes[i]);
    }
    for (const auto& s : step) {
      if (s.target.steady()) {
        ends.insert({s.target.q, s.target.r});
      } else {
        const auto j = node(s.target);
        adj[i].push_back(j);
      }
    }
  }

  if (m.phases_terminate && !nodes.empty()) {
    // Kahn's algorithm; anything left over sits on or behind a cycle.
    std::vector<std::uint32_t> indeg(nodes.size(), 0);
    for (const auto& out : adj) {
      for (auto j : out) ++indeg[j];
    }
    std::vector<std::uint32_t> ready;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
      if (indeg[i] == 0) ready.push_back(i);
    }
    std::size_t peeled = 0;
    while (!ready.empty()) {
      auto i = ready.back();
      ready.pop_back();
      ++peeled;
      for (auto j : adj[i]) {
        if (--indeg[j] == 0) ready.push_back(j);
      }
    }
    if (peeled != nodes.size()) {
      m.phases_terminate = false;
      for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        if (indeg[i] != 0) {
          m.phase_problem = "adaptation can cycle forever through " + render(sys, nodes[i]);
          break;
        }
      }
    }
  }
  m.phase_ends.assign(ends.begin(), ends.end());
  return m;
}

namespace {

struct Grid {
  std::size_t nq, nr;
  std::vector<PairMoves> moves;

  explicit Grid(const FlatSemantics& sem) {
    const auto& sys = sem.system();
    nq = sys.b.states.size();
    nr = sys.s.states.size();
    moves.resize(nq * nr);
    const auto total = static_cast<std::int64_t>(nq * nr);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < total; ++i) {
      const auto q = static_cast<StateIndex>(static_cast<std::size_t>(i) / nr);
      const auto r = static_cast<StateIndex>(static_cast<std::size_t>(i) % nr);
      if (sem.tables().label(r, q)) {
        moves[i] = pair_moves(sem, q, r);
      }
    }
  }

  std::size_t at(const StatePair& p) const { return std::size_t(p.q) * nr + p.r; }
  StatePair pair(std::size_t i) const { return {StateIndex(i / nr), StateIndex(i % nr)}; }
};

AdaptRelation collect(const Grid& g, const std::vector<std::uint8_t>& in) {
  AdaptRelation out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i]) out.insert(g.pair(i));
  }
  return out;
}

}  // namespace

AdaptRelation weak_relation(const SBSystem& sys) {
  const FlatSemantics sem(sys);
  const Grid g(sem);
  const auto n = g.moves.size();
  std::vector<std::uint8_t> in(n, 0);
  for (std::size_t i = 0; i < n; ++i) in[i] = g.moves[i].label && g.moves[i].progress;

  std::vector<std::uint32_t> steady_live(n, 0), end_live(n, 0);
  std::vector<std::vector<std::uint32_t>> rev_steady(n), rev_end(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    for (const auto& p : g.moves[i].steady) {
      rev_steady[g.at(p)].push_back(static_cast<std::uint32_t>(i));
      steady_live[i] += in[g.at(p)];
    }
    for (const auto& p : g.moves[i].phase_ends) {
      rev_end[g.at(p)].push_back(static_cast<std::uint32_t>(i));
      end_live[i] += in[g.at(p)];
    }
  }
  std::vector<std::uint32_t> doomed;
  auto fails = [&](std::size_t i) {
    const auto& m = g.moves[i];
    return (!m.steady.empty() && steady_live[i] == 0) || (m.adapts && end_live[i] == 0);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (in[i] && fails(i)) {
      in[i] = 0;
      doomed.push_back(static_cast<std::uint32_t>(i));
    }
  }
  while (!doomed.empty()) {
    const auto x = doomed.back();
    doomed.pop_back();
    for (auto p : rev_steady[x]) {
      if (in[p] && --steady_live[p] == 0) {
        in[p] = 0;
        doomed.push_back(p);
      }
    }
    for (auto p : rev_end[x]) {
      if (in[p] && --end_live[p] == 0) {
        in[p] = 0;
        doomed.push_back(p);
      }
    }
  }
  return collect(g, in);
}

AdaptRelation strong_adaptability_relation(const SBSystem& sys) {
  const FlatSemantics sem(sys);
  const Grid g(sem);
  const auto n = g.moves.size();
  std::vector<std::uint8_t> in(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = g.moves[i];
    in[i] = m.label && m.progress && m.phases_terminate;
  }
  std::vector<std::vector<std::uint32_t>> rev(n);
  std::vector<std::uint32_t> doomed;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    bool ok = true;
    for (const auto* list : {&g.moves[i].steady, &g.moves[i].phase_ends}) {
      for (const auto& p : *list) {
        rev[g.at(p)].push_back(static_cast<std::uint32_t>(i));
        ok = ok && in[g.at(p)];
      }
    }
    if (!ok) doomed.push_back(static_cast<std::uint32_t>(i));
  }
  for (auto x : doomed) in[x] = 0;
  while (!doomed.empty()) {
    const auto x = doomed.back();
    doomed.pop_back();
    for (auto p : rev[x]) {
      if (in[p]) {
        in[p] = 0;
        doomed.push_back(p);
      }
    }
  }
  return collect(g, in);
}

AdaptRelation reachable_steady_pairs(const FlatLts& flat) {
  AdaptRelation out;
  for (const auto& f : flat.states) {
    if (f.steady()) out.insert({f.q, f.r});
  }
  return out;
}

std::optional<AdaptRelation> strong_relation(const SBSystem& sys) {
  AdaptRelation candidate = reachable_steady_pairs(build_flat(sys));
  if (!is_strong_adaptation(sys, candidate).ok) return std::nullopt;
  return candidate;
}

namespace {

RelationReport check_relation(const SBSystem& sys, const AdaptRelation& rel, Mode mode) {
  for (const auto& p : rel) {
    if (p.q >= sys.b.states.size() || p.r >= sys.s.states.size()) throw ContractError("relation pair out of range");
  }
  const FlatSemantics sem(sys);
  RelationReport report;
  auto fail = [&](const StatePair& p, int clause, std::string msg) {
    report.ok = false;
    report.violations.push_back({p, clause, render(sys, p) + ": " + std::move(msg)});
  };
  for (const auto& p : rel) {
    const PairMoves m = pair_moves(sem, p.q, p.r);
    if (!m.label) {
      fail(p, 1, "B state does not satisfy the S state's constraints");
      continue;
    }
    if (!m.progress) {
      fail(p, 1, "no flat transition leaves the steady state (progress fails)");
      continue;
    }
    if (mode == Mode::Weak) {
      if (!m.steady.empty() && std::none_of(m.steady.begin(), m.steady.end(), [&](auto& x) { return rel.count(x); })) {
        fail(p, 2, "no steady successor is related");
      }
      if (m.adapts &&
          std::none_of(m.phase_ends.begin(), m.phase_ends.end(), [&](auto& x) { return rel.count(x); })) {
        fail(p, 3, m.phase_ends.empty() ? "no adaptation phase completes" : "no completed adaptation phase ends related");
      }
    } else {
      for (const auto& x : m.steady) {
        if (!rel.count(x)) fail(p, 2, "steady successor " + render(sys, x) + " is not related");
      }
      if (!m.phases_terminate) fail(p, 3, m.phase_problem);
      for (const auto& x : m.phase_ends) {
        if (!rel.count(x)) fail(p, 3, "adaptation phase ends at unrelated " + render(sys, x));
      }
    }
  }
  return report;
}

}  // namespace

RelationReport is_weak_adaptation(const SBSystem& sys, const AdaptRelation& rel) {
  return check_relation(sys, rel, Mode::Weak);
}

RelationReport is_strong_adaptation(const SBSystem& sys, const AdaptRelation& rel) {
  return check_relation(sys, rel, Mode::Strong);
}

// ---------------------------------------------------------------- reports

namespace {

nlohmann::ordered_json relation_json(const SBSystem& sys, const AdaptRelation& rel) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : rel) arr.push_back({sys.b.states[p.q].id, sys.s.states[p.r].id});
  return arr;
}

}  // namespace

std::string verdict_to_json(const SBSystem& sys, const Verdict& v) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["system"] = sys.name;
  doc["mode"] = to_string(v.mode);
  doc["holds"] = v.holds;
  doc["relation"] = v.relation ? relation_json(sys, *v.relation) : ordered_json(nullptr);
  ordered_json prefix = ordered_json::array(), cycle = ordered_json::array();
  for (const auto& f : v.prefix) prefix.push_back(render(sys, f));
  for (const auto& f : v.cycle) cycle.push_back(render(sys, f));
  doc["evidence"] = ordered_json{{"prefix", std::move(prefix)}, {"cycle", std::move(cycle)}};
  return doc.dump(2) + "\n";
}

std::string verdict_to_text(const SBSystem& sys, const Verdict& v) {
  std::string out = sys.name + ": " + to_string(v.mode) + " adaptability " + (v.holds ? "holds" : "fails") + "\n";
  out += v.holds ? "witness:\n" : "counterexample:\n";
  for (const auto& f : v.prefix) out += "  " + render(sys, f) + "\n";
  if (!v.cycle.empty()) {
    out += "  repeating:\n";
    for (const auto& f : v.cycle) out += "    " + render(sys, f) + "\n";
  } else if (!v.holds) {
    out += "  (no further transitions)\n";
  }
  if (v.relation) {
    out += "relation (" + std::to_string(v.relation->size()) + " pairs):\n";
    for (const auto& p : *v.relation) out += "  " + render(sys, p) + "\n";
  }
  return out;
}

std::string relation_to_json(const SBSystem& sys, const AdaptRelation& rel) {
  return relation_json(sys, rel).dump() + "\n";
}

AdaptRelation relation_from_json(const SBSystem& sys, const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("relation file: ") + e.what());
  }
  if (doc.is_object()) {
    if (!doc.contains("relation")) throw Error("relation file: object without a \"relation\" key");
    doc = doc["relation"];
  }
  if (!doc.is_array()) throw Error("relation file: expected an array of [q, r] pairs");
  auto id = [](const nlohmann::json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); };
  AdaptRelation rel;
  for (const auto& item : doc) {
    if (!item.is_array() || item.size() != 2) throw Error("relation file: each entry must be a [q, r] pair");
    rel.insert({sys.b_index(id(item[0])), sys.s_index(id(item[1]))});
  }
  return rel;
}

}  // namespace sbcheck
