#include "sbcheck/kripke.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "detail.hpp"

namespace sbcheck {

const char* to_string(Atom a) {
  switch (a) {
    case Atom::Adapting:
      return "adapting";
    case Atom::Steady:
      return "steady";
    case Atom::Progress:
      return "progress";
  }
  return "?";
}

std::string LabelSet::str() const {
  std::string out = "{";
  for (Atom a : {Atom::Adapting, Atom::Steady, Atom::Progress}) {
    if (!has(a)) continue;
    if (out.size() > 1) out += ", ";
    out += to_string(a);
  }
  return out + "}";
}

Kripke Kripke::from_edges(std::size_t n, StateIndex initial, std::vector<std::pair<StateIndex, StateIndex>> edges,
                          std::vector<LabelSet> labels) {
  if (labels.size() != n) throw ContractError("label vector does not match state count");
  if (n == 0 || initial >= n) throw ContractError("initial state out of range");
  Kripke k;
  k.n_ = n;
  k.initial_ = initial;
  k.labels_ = std::move(labels);
  k.dead_.assign(n, 1);
  for (auto [from, to] : edges) {
    if (from >= n || to >= n) throw ContractError("edge endpoint out of range");
    k.dead_[from] = 0;
  }
  for (StateIndex t = 0; t < n; ++t) {
    if (k.dead_[t]) edges.emplace_back(t, t);
  }
  // Stable order keeps the caller's successor order per state.
  std::stable_sort(edges.begin(), edges.end(), [](auto& a, auto& b) { return a.first < b.first; });

  k.succ_off_.assign(n + 1, 0);
  k.pred_off_.assign(n + 1, 0);
  for (auto [from, to] : edges) {
    ++k.succ_off_[from + 1];
    ++k.pred_off_[to + 1];
  }
  std::partial_sum(k.succ_off_.begin(), k.succ_off_.end(), k.succ_off_.begin());
  std::partial_sum(k.pred_off_.begin(), k.pred_off_.end(), k.pred_off_.begin());
  k.succ_.resize(edges.size());
  k.pred_.resize(edges.size());
  auto pfill = k.pred_off_;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    k.succ_[i] = edges[i].second;
    k.pred_[pfill[edges[i].second]++] = edges[i].first;
  }
  return k;
}

std::size_t Kripke::dead_count() const { return static_cast<std::size_t>(std::count(dead_.begin(), dead_.end(), 1)); }

Kripke to_kripke(const FlatLts& flat) {
  const auto n = flat.size();
  std::vector<LabelSet> labels(n);
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < sn; ++i) {
    const auto t = static_cast<StateIndex>(i);
    auto out = flat.successors(t);
    LabelSet l;
    if (!out.empty()) {
      l.add(Atom::Progress);
      if (flat.states[t].steady()) l.add(Atom::Steady);
      if (std::any_of(out.begin(), out.end(), [](const FlatEdge& e) { return !e.label.steady(); })) {
        l.add(Atom::Adapting);
      }
    }
    labels[t] = l;
  }
  std::vector<std::pair<StateIndex, StateIndex>> edges;
  edges.reserve(flat.edge_count());
  for (StateIndex t = 0; t < n; ++t) {
    for (const auto& e : flat.successors(t)) edges.emplace_back(t, e.target);
  }
  return Kripke::from_edges(n, flat.initial, std::move(edges), std::move(labels));
}

std::string kripke_to_dot(const SBSystem& sys, const FlatLts& flat, const Kripke& k) {
  std::string out =
      "digraph " + detail::dot_quote(sys.name + "_kripke") + " {\n  rankdir=LR;\n  node [shape=box];\n";
  for (StateIndex t = 0; t < k.size(); ++t) {
    out += "  t" + std::to_string(t) + " [label=" +
           detail::dot_quote(render(sys, flat.states[t]) + "\\n" + k.labels(t).str());
    if (k.labels(t).has(Atom::Steady)) out += ", style=filled, fillcolor=\"#d0d0d0\"";
    if (k.dead(t)) out += ", color=red";
    if (t == k.initial()) out += ", peripheries=2";
    out += "];\n";
  }
  for (StateIndex t = 0; t < k.size(); ++t) {
    for (StateIndex u : k.successors(t)) {
      out += "  t" + std::to_string(t) + " -> t" + std::to_string(u);
      if (k.dead(t)) out += " [style=dotted]";
      out += ";\n";
    }
  }
  return out + "}\n";
}

std::string kripke_to_json(const SBSystem& sys, const FlatLts& flat, const Kripke& k) {
  using nlohmann::ordered_json;
  ordered_json states = ordered_json::array();
  for (StateIndex t = 0; t < k.size(); ++t) {
    ordered_json labels = ordered_json::array();
    for (Atom a : {Atom::Adapting, Atom::Steady, Atom::Progress}) {
      if (k.labels(t).has(a)) labels.push_back(to_string(a));
    }
    states.push_back(ordered_json{{"index", t},
                                  {"text", render(sys, flat.states[t])},
                                  {"labels", std::move(labels)},
                                  {"dead", k.dead(t)}});
  }
  ordered_json edges = ordered_json::array();
  for (StateIndex t = 0; t < k.size(); ++t) {
    for (StateIndex u : k.successors(t)) edges.push_back(ordered_json::array({t, u}));
  }
  ordered_json doc;
  doc["system"] = sys.name;
  doc["stage"] = "kripke";
  doc["initial"] = k.initial();
  doc["states"] = std::move(states);
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

}  // namespace sbcheck
