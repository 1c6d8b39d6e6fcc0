#include "sbcheck/flatten.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "detail.hpp"

namespace sbcheck {

const char* to_string(FlatRule rule) {
  switch (rule) {
    case FlatRule::Steady:
      return "Steady";
    case FlatRule::AdaptStart:
      return "AdaptStart";
    case FlatRule::Adapt:
      return "Adapt";
    case FlatRule::AdaptEnd:
      return "AdaptEnd";
    case FlatRule::AdaptStartEnd:
      return "AdaptStartEnd";
  }
  return "?";
}

namespace {

struct BGraph {
  std::vector<std::uint32_t> offsets;
  std::vector<StateIndex> targets;
  // S transitions leaving each S state, in declaration order.
  std::vector<std::vector<std::uint32_t>> s_out;

  explicit BGraph(const SBSystem& sys) {
    const auto nq = sys.b.states.size();
    offsets.assign(nq + 1, 0);
    for (auto [from, to] : sys.b.transitions) ++offsets[from + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    targets.resize(sys.b.transitions.size());
    auto fill = offsets;
    for (auto [from, to] : sys.b.transitions) targets[fill[from]++] = to;
    for (std::size_t q = 0; q < nq; ++q) {
      std::sort(targets.begin() + offsets[q], targets.begin() + offsets[q + 1]);
    }
    s_out.resize(sys.s.states.size());
    for (std::size_t t = 0; t < sys.s.transitions.size(); ++t) {
      s_out[sys.s.transitions[t].source].push_back(static_cast<std::uint32_t>(t));
    }
  }

  std::span<const StateIndex> successors(StateIndex q) const {
    return {targets.data() + offsets[q], targets.data() + offsets[q + 1]};
  }
};

std::vector<std::uint32_t> compute_phase_rank(const SBSystem& sys) {
  const auto nt = sys.s.transitions.size();
  std::vector<std::string> text(nt);
  for (std::size_t t = 0; t < nt; ++t) text[t] = to_string(sys.s.transitions[t].invariant);
  std::vector<std::uint32_t> order(nt);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::tie(sys.s.transitions[a].target, text[a], a) < std::tie(sys.s.transitions[b].target, text[b], b);
  });
  std::vector<std::uint32_t> rank(nt);
  for (std::uint32_t i = 0; i < nt; ++i) rank[order[i]] = i;
  return rank;
}

std::uint32_t phase_key(const std::vector<std::uint32_t>& rank, std::int32_t phase) {
  return phase == kSteady ? 0 : rank[phase] + 1;
}

auto state_key(const std::vector<std::uint32_t>& rank, const FlatState& f) {
  return std::make_tuple(f.q, f.r, phase_key(rank, f.phase));
}

struct DirectSat {
  const SBSystem& sys;
  bool label(StateIndex r, StateIndex q) const { return evaluate(sys.s.states[r].label, sys.b.states[q].obs); }
  bool invariant(std::size_t t, StateIndex q) const {
    return evaluate(sys.s.transitions[t].invariant, sys.b.states[q].obs);
  }
};

// The five rules. `out` is cleared and filled in rule-application order.
template <class Sat>
void derive(const SBSystem& sys, const BGraph& g, const Sat& sat, const FlatState& f,
            std::vector<FlatSuccessor>& out) {
  out.clear();
  auto succ = g.successors(f.q);
  if (succ.empty()) return;

  if (f.steady()) {
    if (!sat.label(f.r, f.q)) return;
    for (StateIndex q2 : succ) {
      if (sat.label(f.r, q2)) out.push_back({{f.r, kSteady}, FlatRule::Steady, {q2, f.r, kSteady}});
    }
    if (!out.empty()) return;
    for (std::uint32_t t : g.s_out[f.r]) {
      const auto& st = sys.s.transitions[t];
      const auto phase = static_cast<std::int32_t>(t);
      for (StateIndex q2 : succ) {
        if (sat.label(st.target, q2)) {
          out.push_back({{f.r, phase}, FlatRule::AdaptStartEnd, {q2, st.target, kSteady}});
        } else if (sat.invariant(t, q2)) {
          out.push_back({{f.r, phase}, FlatRule::AdaptStart, {q2, f.r, phase}});
        }
      }
    }
    return;
  }

  const auto t = static_cast<std::size_t>(f.phase);
  const StateIndex target = sys.s.transitions[t].target;
  if (!sat.invariant(t, f.q) || sat.label(target, f.q)) return;
  for (StateIndex q2 : succ) {
    if (sat.label(target, q2)) out.push_back({{f.r, f.phase}, FlatRule::AdaptEnd, {q2, target, kSteady}});
  }
  if (!out.empty()) return;
  for (StateIndex q2 : succ) {
    if (sat.invariant(t, q2)) out.push_back({{f.r, f.phase}, FlatRule::Adapt, {q2, f.r, f.phase}});
  }
}

bool edge_less(const std::vector<std::uint32_t>& rank, const FlatLabel& la, StateIndex ta, const FlatLabel& lb,
               StateIndex tb) {
  return std::make_tuple(phase_key(rank, la.phase), ta) < std::make_tuple(phase_key(rank, lb.phase), tb);
}

// Canonical renumbering of an exploration result.
FlatLts finalize(std::vector<FlatState> found, std::vector<std::vector<FlatEdge>> adj, StateIndex seed,
                 std::vector<std::uint32_t> rank) {
  const auto n = found.size();
  std::vector<StateIndex> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(),
            [&](StateIndex a, StateIndex b) { return state_key(rank, found[a]) < state_key(rank, found[b]); });
  std::vector<StateIndex> renum(n);
  for (StateIndex i = 0; i < n; ++i) renum[perm[i]] = i;

  FlatLts lts;
  lts.states.resize(n);
  lts.offsets.assign(n + 1, 0);
  std::size_t total = 0;
  for (const auto& a : adj) total += a.size();
  lts.edges.reserve(total);
  for (StateIndex i = 0; i < n; ++i) {
    const StateIndex old = perm[i];
    lts.states[i] = found[old];
    auto& out = adj[old];
    for (auto& e : out) e.target = renum[e.target];
    std::sort(out.begin(), out.end(),
              [&](const FlatEdge& a, const FlatEdge& b) { return edge_less(rank, a.label, a.target, b.label, b.target); });
    lts.edges.insert(lts.edges.end(), out.begin(), out.end());
    lts.offsets[i + 1] = static_cast<std::uint32_t>(lts.edges.size());
  }
  lts.initial = renum[seed];
  lts.phase_rank = std::move(rank);
  return lts;
}

void sort_successors(const std::vector<std::uint32_t>& rank, std::vector<FlatSuccessor>& out) {
  std::sort(out.begin(), out.end(), [&](const FlatSuccessor& a, const FlatSuccessor& b) {
    return std::make_tuple(phase_key(rank, a.label.phase), state_key(rank, a.target)) <
           std::make_tuple(phase_key(rank, b.label.phase), state_key(rank, b.target));
  });
}

void check_seed(const SBSystem& sys, const FlatState& seed) {
  if (seed.q >= sys.b.states.size() || seed.r >= sys.s.states.size()) throw ContractError("flat seed out of range");
  if (!seed.steady()) {
    if (static_cast<std::size_t>(seed.phase) >= sys.s.transitions.size() ||
        sys.s.transitions[seed.phase].source != seed.r) {
      throw ContractError("flat seed names an S transition that does not leave its S state");
    }
  }
}

}  // namespace

std::optional<StateIndex> FlatLts::find(const FlatState& f) const {
  if (f.phase != kSteady && static_cast<std::size_t>(f.phase) >= phase_rank.size()) return std::nullopt;
  auto key = state_key(phase_rank, f);
  auto it = std::lower_bound(states.begin(), states.end(), key,
                             [&](const FlatState& s, const auto& k) { return state_key(phase_rank, s) < k; });
  if (it == states.end() || !(*it == f)) return std::nullopt;
  return static_cast<StateIndex>(it - states.begin());
}

std::vector<FlatSuccessor> flat_successors(const SBSystem& sys, const FlatState& f) {
  check_seed(sys, f);
  BGraph g(sys);
  std::vector<FlatSuccessor> out;
  derive(sys, g, DirectSat{sys}, f, out);
  sort_successors(compute_phase_rank(sys), out);
  return out;
}

struct FlatSemantics::Graph : BGraph {
  using BGraph::BGraph;
};

FlatSemantics::FlatSemantics(const SBSystem& sys)
    : sys_(&sys),
      tables_(SatTables::compute(sys)),
      graph_(std::make_unique<Graph>(sys)),
      rank_(compute_phase_rank(sys)) {}

FlatSemantics::~FlatSemantics() = default;
FlatSemantics::FlatSemantics(FlatSemantics&&) noexcept = default;
FlatSemantics& FlatSemantics::operator=(FlatSemantics&&) noexcept = default;

void FlatSemantics::successors(const FlatState& f, std::vector<FlatSuccessor>& out) const {
  derive(*sys_, *graph_, tables_, f, out);
  sort_successors(rank_, out);
}

std::vector<FlatSuccessor> FlatSemantics::successors(const FlatState& f) const {
  check_seed(*sys_, f);
  std::vector<FlatSuccessor> out;
  successors(f, out);
  return out;
}

std::span<const StateIndex> FlatSemantics::b_successors(StateIndex q) const { return graph_->successors(q); }

bool progress(const SBSystem& sys, StateIndex q, StateIndex r) {
  return !flat_successors(sys, FlatState{q, r, kSteady}).empty();
}

SatTables SatTables::compute(const SBSystem& sys) {
  SatTables t;
  const auto nq = sys.b.states.size();
  const auto nr = sys.s.states.size();
  const auto nt = sys.s.transitions.size();
  t.nq_ = nq;
  t.label_.assign(nr * nq, 0);
  t.inv_.assign(nt * nq, 0);
  const auto n = static_cast<std::int64_t>(nq);
#pragma omp parallel for schedule(static)
  for (std::int64_t qi = 0; qi < n; ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    const auto& obs = sys.b.states[q].obs;
    for (std::size_t r = 0; r < nr; ++r) t.label_[r * nq + q] = evaluate(sys.s.states[r].label, obs);
    for (std::size_t k = 0; k < nt; ++k) t.inv_[k * nq + q] = evaluate(sys.s.transitions[k].invariant, obs);
  }
  return t;
}

SatTables SatTables::compute_reference(const SBSystem& sys) {
  SatTables t;
  const auto nq = sys.b.states.size();
  t.nq_ = nq;
  for (const auto& r : sys.s.states) {
    for (const auto& q : sys.b.states) t.label_.push_back(evaluate(r.label, q.obs));
  }
  for (const auto& st : sys.s.transitions) {
    for (const auto& q : sys.b.states) t.inv_.push_back(evaluate(st.invariant, q.obs));
  }
  return t;
}

FlatLts build_flat(const SBSystem& sys) { return build_flat(sys, FlatState{sys.b.initial, sys.s.initial, kSteady}); }

FlatLts build_flat(const SBSystem& sys, const FlatState& seed) {
  check_seed(sys, seed);
  const FlatSemantics sem(sys);
  const std::uint64_t nr = sys.s.states.size();
  const std::uint64_t np = sys.s.transitions.size() + 1;
  auto pack = [&](const FlatState& f) {
    return (std::uint64_t{f.q} * nr + f.r) * np + static_cast<std::uint64_t>(f.phase + 1);
  };

  std::vector<FlatState> found{seed};
  std::vector<std::vector<FlatEdge>> adj(1);
  std::unordered_map<std::uint64_t, StateIndex> ids{{pack(seed), 0}};
  std::vector<StateIndex> frontier{0};
  std::vector<StateIndex> next;
  std::vector<std::vector<FlatSuccessor>> local;

  while (!frontier.empty()) {
    local.resize(frontier.size());
    const auto width = static_cast<std::int64_t>(frontier.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < width; ++i) sem.successors(found[frontier[i]], local[i]);

    next.clear();
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const StateIndex src = frontier[i];
      for (const auto& s : local[i]) {
        auto [it, fresh] = ids.emplace(pack(s.target), static_cast<StateIndex>(found.size()));
        if (fresh) {
          found.push_back(s.target);
          adj.emplace_back();
          next.push_back(it->second);
        }
        adj[src].push_back({s.label, s.rule, it->second});
      }
    }
    frontier.swap(next);
  }
  return finalize(std::move(found), std::move(adj), 0, compute_phase_rank(sys));
}

FlatLts build_flat_reference(const SBSystem& sys) {
  return build_flat_reference(sys, FlatState{sys.b.initial, sys.s.initial, kSteady});
}

FlatLts build_flat_reference(const SBSystem& sys, const FlatState& seed) {
  check_seed(sys, seed);
  const BGraph g(sys);
  const auto rank = compute_phase_rank(sys);
  std::vector<FlatSuccessor> succ;
  std::map<FlatState, StateIndex> ids{{seed, 0}};
  std::vector<FlatState> found{seed};
  std::vector<std::vector<FlatEdge>> adj(1);
  std::queue<StateIndex> work;
  work.push(0);
  while (!work.empty()) {
    const StateIndex src = work.front();
    work.pop();
    derive(sys, g, DirectSat{sys}, found[src], succ);
    sort_successors(rank, succ);
    for (const auto& s : succ) {
      auto [it, fresh] = ids.emplace(s.target, static_cast<StateIndex>(found.size()));
      if (fresh) {
        found.push_back(s.target);
        adj.emplace_back();
        work.push(it->second);
      }
      adj[src].push_back({s.label, s.rule, it->second});
    }
  }
  return finalize(std::move(found), std::move(adj), 0, compute_phase_rank(sys));
}

// ---------------------------------------------------------------- rendering

std::string render(const SBSystem& sys, const FlatState& f) {
  std::string out = "(" + sys.b.states[f.q].id + ", " + sys.s.states[f.r].id + ", {";
  if (!f.steady()) {
    const auto& t = sys.s.transitions[f.phase];
    out += "(" + to_string(t.invariant) + ", " + sys.s.states[t.target].id + ")";
  }
  return out + "})";
}

std::string render(const SBSystem& sys, const FlatLabel& l) {
  if (l.steady()) return sys.s.states[l.r].id;
  const auto& t = sys.s.transitions[l.phase];
  return sys.s.states[l.r].id + ", " + to_string(t.invariant) + ", " + sys.s.states[t.target].id;
}

std::string flat_to_dot(const SBSystem& sys, const FlatLts& flat) {
  std::string out = "digraph " + detail::dot_quote(sys.name + "_flat") + " {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (StateIndex i = 0; i < flat.size(); ++i) {
    const auto& f = flat.states[i];
    out += "  s" + std::to_string(i) + " [label=" + detail::dot_quote(render(sys, f));
    if (f.steady()) out += ", style=filled, fillcolor=\"#d0d0d0\"";
    if (i == flat.initial) out += ", peripheries=2";
    out += "];\n";
  }
  for (StateIndex i = 0; i < flat.size(); ++i) {
    for (const auto& e : flat.successors(i)) {
      out += "  s" + std::to_string(i) + " -> s" + std::to_string(e.target) +
             " [label=" + detail::dot_quote(render(sys, e.label));
      if (!e.label.steady()) out += ", style=dashed";
      out += "];\n";
    }
  }
  return out + "}\n";
}

std::string flat_to_json(const SBSystem& sys, const FlatLts& flat) {
  using nlohmann::ordered_json;
  ordered_json states = ordered_json::array();
  for (StateIndex i = 0; i < flat.size(); ++i) {
    const auto& f = flat.states[i];
    ordered_json s;
    s["index"] = i;
    s["q"] = sys.b.states[f.q].id;
    s["r"] = sys.s.states[f.r].id;
    if (f.steady()) {
      s["rho"] = nullptr;
    } else {
      const auto& t = sys.s.transitions[f.phase];
      s["rho"] = ordered_json{{"invariant", to_string(t.invariant)}, {"target", sys.s.states[t.target].id}};
    }
    s["text"] = render(sys, f);
    states.push_back(std::move(s));
  }
  ordered_json transitions = ordered_json::array();
  for (StateIndex i = 0; i < flat.size(); ++i) {
    for (const auto& e : flat.successors(i)) {
      ordered_json label;
      label["r"] = sys.s.states[e.label.r].id;
      if (e.label.steady()) {
        label["kind"] = "steady";
      } else {
        const auto& t = sys.s.transitions[e.label.phase];
        label["kind"] = "adapt";
        label["invariant"] = to_string(t.invariant);
        label["target"] = sys.s.states[t.target].id;
      }
      transitions.push_back(ordered_json{{"source", i}, {"target", e.target}, {"label", label},
                                         {"rule", to_string(e.rule)}});
    }
  }
  ordered_json doc;
  doc["system"] = sys.name;
  doc["stage"] = "flat";
  doc["initial"] = flat.initial;
  doc["states"] = std::move(states);
  doc["transitions"] = std::move(transitions);
  return doc.dump(2) + "\n";
}

}  // namespace sbcheck
