#include "sbcheck/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace sbcheck {

std::optional<StateIndex> BLevel::find(std::string_view id) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].id == id) return static_cast<StateIndex>(i);
  }
  return std::nullopt;
}

std::optional<StateIndex> SLevel::find(std::string_view id) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].id == id) return static_cast<StateIndex>(i);
  }
  return std::nullopt;
}

StateIndex SBSystem::b_index(std::string_view id) const {
  if (auto q = b.find(id)) return *q;
  throw Error("unknown B state '" + std::string(id) + "'");
}

StateIndex SBSystem::s_index(std::string_view id) const {
  if (auto r = s.find(id)) return *r;
  throw Error("unknown S state '" + std::string(id) + "'");
}

std::size_t SBSystem::s_transition(std::string_view source, std::string_view target) const {
  StateIndex from = s_index(source);
  StateIndex to = s_index(target);
  std::optional<std::size_t> found;
  for (std::size_t t = 0; t < s.transitions.size(); ++t) {
    if (s.transitions[t].source == from && s.transitions[t].target == to) {
      if (found) throw Error("several S transitions " + std::string(source) + " -> " + std::string(target));
      found = t;
    }
  }
  if (!found) throw Error("no S transition " + std::string(source) + " -> " + std::string(target));
  return *found;
}

std::string to_string(const Diagnostic& d) {
  return std::string(d.severity == Diagnostic::Severity::Error ? "error: " : "warning: ") + d.message;
}

// ---------------------------------------------------------------- rule expansion

BLevel expand_rules(const std::vector<GuardedRule>& rules, const Signature& sig, const Observation& init,
                    std::vector<Diagnostic>* lints) {
  if (auto msg = check_observation(sig, init); !msg.empty()) throw Error("initial observation: " + msg);

  std::map<Observation, StateIndex> seen;
  std::vector<Observation> order;
  std::vector<std::pair<StateIndex, StateIndex>> edges;
  std::set<std::string> reported;
  std::queue<StateIndex> work;

  seen.emplace(init, 0);
  order.push_back(init);
  work.push(0);
  while (!work.empty()) {
    StateIndex cur = work.front();
    work.pop();
    const Observation pre = order[cur];
    for (const auto& rule : rules) {
      if (!evaluate(rule.guard, pre)) continue;
      Observation post = pre;
      bool in_range = true;
      for (const auto& u : rule.updates) {
        Value v = evaluate_term(u.expr, pre);
        if (!sig.sort(u.observable).contains(v)) {
          in_range = false;
          if (lints) {
            std::string msg = "rule " + rule.name + " at " + render_tuple(pre) + " would set " +
                              sig.name(u.observable) + " to " + std::to_string(v) + "; firing pruned";
            if (reported.insert(msg).second) lints->push_back({Diagnostic::Severity::Warning, msg});
          }
          break;
        }
        post.values[u.observable] = v;
      }
      if (!in_range) continue;
      auto [it, fresh] = seen.emplace(post, static_cast<StateIndex>(order.size()));
      if (fresh) {
        order.push_back(post);
        work.push(it->second);
      }
      edges.emplace_back(cur, it->second);
    }
  }

  // Renumber by observation order.
  std::vector<StateIndex> rank(order.size());
  {
    StateIndex i = 0;
    for (auto& [obs, idx] : seen) rank[idx] = i++;
  }
  BLevel b;
  b.states.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    b.states[rank[i]] = BState{render_tuple(order[i]), order[i]};
  }
  b.initial = rank[0];
  for (auto& [from, to] : edges) b.transitions.emplace_back(rank[from], rank[to]);
  std::sort(b.transitions.begin(), b.transitions.end());
  b.transitions.erase(std::unique(b.transitions.begin(), b.transitions.end()), b.transitions.end());
  return b;
}

// ---------------------------------------------------------------- DSL parser

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Cursor {
 public:
  Cursor(std::string_view line, std::size_t lineno) : line_(line), lineno_(lineno) {}

  void ws() {
    while (i_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[i_]))) ++i_;
  }
  bool eof() {
    ws();
    return i_ >= line_.size();
  }
  SourcePos pos() const { return {lineno_, i_ + 1}; }

  std::string word() {
    ws();
    std::size_t start = i_;
    while (i_ < line_.size() && ident_char(line_[i_])) ++i_;
    return std::string(line_.substr(start, i_ - start));
  }

  std::string expect_word(const char* what) {
    auto p = (ws(), pos());
    auto w = word();
    if (w.empty()) throw ModelError(p, std::string("expected ") + what);
    return w;
  }

  bool lit(std::string_view s) {
    ws();
    if (line_.substr(i_, s.size()) != s) return false;
    i_ += s.size();
    return true;
  }

  void expect(std::string_view s) {
    if (!lit(s)) throw ModelError(pos(), "expected '" + std::string(s) + "'");
  }

  // Text up to (not including) `delim`, or to end of line.
  std::string_view until(std::string_view delim, SourcePos& start) {
    ws();
    start = pos();
    std::size_t end = delim.empty() ? std::string_view::npos : line_.find(delim, i_);
    if (end == std::string_view::npos) end = line_.size();
    auto out = line_.substr(i_, end - i_);
    i_ = end;
    return out;
  }

  void expect_end() {
    if (!eof()) throw ModelError(pos(), "unexpected '" + std::string(line_.substr(i_)) + "'");
  }

 private:
  std::string_view line_;
  std::size_t lineno_;
  std::size_t i_ = 0;
};

struct Located {
  std::string id;
  SourcePos pos;
};

struct RawTrans {
  Located from;
  Located to;
  Formula inv;
};

enum class Section { None, Observables, Rules, Explicit, Structure };

Value parse_value(const Sort& sort, const std::string& text, SourcePos pos, const std::string& name) {
  auto v = sort.parse_value(text);
  if (!v) throw ModelError(pos, "value '" + text + "' is not in " + sort.describe() + " of '" + name + "'");
  return *v;
}

// `a=1, b=M` → observation over `sig`; every observable must be assigned once.
Observation parse_assignment(Cursor& c, const Signature& sig, std::string_view closer) {
  Observation obs;
  obs.values.assign(sig.size(), 0);
  std::vector<bool> set(sig.size(), false);
  while (true) {
    c.ws();
    if (!closer.empty() && c.lit(closer)) break;
    if (closer.empty() && c.eof()) break;
    auto p = c.pos();
    auto name = c.expect_word("observable name");
    auto idx = sig.find(name);
    if (!idx) throw ModelError(p, "unknown observable '" + name + "'");
    if (set[*idx]) throw ModelError(p, "observable '" + name + "' assigned twice");
    c.expect("=");
    c.ws();
    auto vp = c.pos();
    bool neg = c.lit("-");
    auto text = c.word();
    if (text.empty()) throw ModelError(vp, "expected a value for '" + name + "'");
    obs.values[*idx] = parse_value(sig.sort(*idx), neg ? "-" + text : text, vp, name);
    set[*idx] = true;
    if (!c.lit(",")) {
      if (!closer.empty()) c.expect(closer);
      break;
    }
  }
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (!set[i]) throw ModelError(c.pos(), "observable '" + sig.name(i) + "' not assigned");
  }
  return obs;
}

Sort parse_sort(Cursor& c) {
  auto p = (c.ws(), c.pos());
  auto kind = c.expect_word("sort");
  if (kind == "bool") return Sort::boolean();
  if (kind == "int") {
    auto read_int = [&]() -> Value {
      c.ws();
      auto vp = c.pos();
      bool neg = c.lit("-");
      auto digits = c.word();
      std::string text = (neg ? "-" : "") + digits;
      Value v = 0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (digits.empty() || ec != std::errc() || end != text.data() + text.size()) {
        throw ModelError(vp, "expected an integer bound");
      }
      return v;
    };
    Value lo = read_int();
    c.expect("..");
    Value hi = read_int();
    if (lo > hi) throw ModelError(p, "empty integer range");
    return Sort::integer(lo, hi);
  }
  if (kind == "enum") {
    c.expect("{");
    std::vector<std::string> labels;
    do {
      labels.push_back(c.expect_word("enum label"));
    } while (c.lit(","));
    c.expect("}");
    try {
      return Sort::enumeration(std::move(labels));
    } catch (const Error& e) {
      throw ModelError(p, e.what());
    }
  }
  throw ModelError(p, "unknown sort '" + kind + "'");
}

}  // namespace

SBSystem parse_model(std::string_view text) {
  SBSystem sys;
  Section section = Section::None;
  bool rule_mode = false;
  bool have_behaviour = false;
  bool have_structure = false;

  std::optional<Observation> rule_init;
  std::optional<Located> b_init;
  std::optional<Located> s_init;
  std::vector<Located> b_ids;
  std::vector<Observation> b_obs;
  std::vector<std::pair<Located, Located>> b_trans;
  std::vector<Located> s_ids;
  std::vector<Formula> s_labels;
  std::vector<RawTrans> s_trans;
  std::set<std::string> rule_names;

  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    Cursor c(line, lineno);
    if (c.eof()) continue;
    auto p = c.pos();
    auto head = c.word();

    if (head == "system") {
      sys.name = c.expect_word("system name");
      c.expect_end();
      continue;
    }
    if (head == "observables") {
      c.expect_end();
      section = Section::Observables;
      continue;
    }
    if (head == "behaviour" || head == "behavior") {
      if (have_behaviour) throw ModelError(p, "second behaviour section");
      auto mode = c.expect_word("'rules' or 'explicit'");
      if (mode != "rules" && mode != "explicit") throw ModelError(p, "behaviour mode must be 'rules' or 'explicit'");
      c.expect_end();
      rule_mode = mode == "rules";
      section = rule_mode ? Section::Rules : Section::Explicit;
      have_behaviour = true;
      continue;
    }
    if (head == "structure") {
      if (have_structure) throw ModelError(p, "second structure section");
      c.expect_end();
      section = Section::Structure;
      have_structure = true;
      continue;
    }

    switch (section) {
      case Section::None:
        throw ModelError(p, "statement outside of a section");

      case Section::Observables: {
        if (head.empty()) throw ModelError(p, "expected observable name");
        if (have_behaviour || have_structure) throw ModelError(p, "observables must precede behaviour/structure");
        c.expect(":");
        Sort sort = parse_sort(c);
        c.expect_end();
        try {
          sys.sig.add(head, std::move(sort));
        } catch (const Error& e) {
          throw ModelError(p, e.what());
        }
        break;
      }

      case Section::Rules: {
        if (head == "init") {
          if (rule_init) throw ModelError(p, "duplicate init");
          rule_init = parse_assignment(c, sys.sig, "");
        } else if (head == "rule") {
          auto rp = (c.ws(), c.pos());
          GuardedRule rule;
          rule.name = c.expect_word("rule name");
          if (!rule_names.insert(rule.name).second) throw ModelError(rp, "duplicate rule '" + rule.name + "'");
          c.expect(":");
          SourcePos gp;
          auto guard = c.until("->", gp);
          rule.guard = parse_formula(guard, sys.sig, gp);
          c.expect("->");
          std::set<std::size_t> targets;
          do {
            auto up = (c.ws(), c.pos());
            auto name = c.expect_word("observable name");
            auto idx = sys.sig.find(name);
            if (!idx) throw ModelError(up, "unknown observable '" + name + "'");
            if (sys.sig.sort(*idx).kind() != Sort::Kind::Int) {
              throw ModelError(up, "update target '" + name + "' is not integer-sorted");
            }
            if (!targets.insert(*idx).second) throw ModelError(up, "'" + name + "' updated twice");
            c.expect(":=");
            SourcePos ep;
            auto expr = c.until(",", ep);
            rule.updates.push_back({*idx, parse_int_expr(expr, sys.sig, ep)});
          } while (c.lit(","));
          c.expect_end();
          sys.rules.push_back(std::move(rule));
        } else {
          throw ModelError(p, "expected 'init' or 'rule'");
        }
        break;
      }

      case Section::Explicit: {
        if (head == "state") {
          auto sp = (c.ws(), c.pos());
          auto id = c.expect_word("state id");
          c.expect("{");
          b_obs.push_back(parse_assignment(c, sys.sig, "}"));
          c.expect_end();
          b_ids.push_back({id, sp});
        } else if (head == "init") {
          if (b_init) throw ModelError(p, "duplicate init");
          auto sp = (c.ws(), c.pos());
          b_init = Located{c.expect_word("state id"), sp};
          c.expect_end();
        } else if (head == "trans") {
          auto fp = (c.ws(), c.pos());
          auto from = c.expect_word("state id");
          c.expect("->");
          auto tp = (c.ws(), c.pos());
          auto to = c.expect_word("state id");
          c.expect_end();
          b_trans.push_back({{from, fp}, {to, tp}});
        } else {
          throw ModelError(p, "expected 'state', 'init' or 'trans'");
        }
        break;
      }

      case Section::Structure: {
        if (head == "state") {
          auto sp = (c.ws(), c.pos());
          auto id = c.expect_word("state id");
          c.expect(":");
          SourcePos fp;
          auto label = c.until("", fp);
          s_labels.push_back(parse_formula(label, sys.sig, fp));
          s_ids.push_back({id, sp});
        } else if (head == "init") {
          if (s_init) throw ModelError(p, "duplicate init");
          auto sp = (c.ws(), c.pos());
          s_init = Located{c.expect_word("state id"), sp};
          c.expect_end();
        } else if (head == "trans") {
          auto fp = (c.ws(), c.pos());
          auto from = c.expect_word("state id");
          c.expect("->");
          auto tp = (c.ws(), c.pos());
          auto to = c.expect_word("state id");
          auto kp = (c.ws(), c.pos());
          if (c.word() != "inv") throw ModelError(kp, "expected 'inv'");
          SourcePos ip;
          auto inv = c.until("", ip);
          s_trans.push_back({{from, fp}, {to, tp}, parse_formula(inv, sys.sig, ip)});
        } else {
          throw ModelError(p, "expected 'state', 'init' or 'trans'");
        }
        break;
      }
    }
  }

  SourcePos eof{lineno, 1};
  if (sys.sig.empty()) throw ModelError(eof, "no observables declared");
  if (!have_behaviour) throw ModelError(eof, "missing behaviour section");
  if (!have_structure) throw ModelError(eof, "missing structure section");

  if (rule_mode) {
    if (!rule_init) throw ModelError(eof, "behaviour rules: missing init");
    sys.b = expand_rules(sys.rules, sys.sig, *rule_init, &sys.lints);
  } else {
    std::unordered_map<std::string, StateIndex> index;
    for (std::size_t i = 0; i < b_ids.size(); ++i) {
      if (!index.emplace(b_ids[i].id, static_cast<StateIndex>(i)).second) {
        throw ModelError(b_ids[i].pos, "duplicate B state '" + b_ids[i].id + "'");
      }
      sys.b.states.push_back({b_ids[i].id, b_obs[i]});
    }
    auto resolve = [&](const Located& l) {
      auto it = index.find(l.id);
      if (it == index.end()) throw ModelError(l.pos, "unknown B state '" + l.id + "'");
      return it->second;
    };
    if (!b_init) throw ModelError(eof, "behaviour explicit: missing init");
    sys.b.initial = resolve(*b_init);
    for (auto& [from, to] : b_trans) sys.b.transitions.emplace_back(resolve(from), resolve(to));
    std::sort(sys.b.transitions.begin(), sys.b.transitions.end());
    sys.b.transitions.erase(std::unique(sys.b.transitions.begin(), sys.b.transitions.end()),
                            sys.b.transitions.end());
  }

  std::unordered_map<std::string, StateIndex> s_index;
  for (std::size_t i = 0; i < s_ids.size(); ++i) {
    if (!s_index.emplace(s_ids[i].id, static_cast<StateIndex>(i)).second) {
      throw ModelError(s_ids[i].pos, "duplicate S state '" + s_ids[i].id + "'");
    }
    sys.s.states.push_back({s_ids[i].id, s_labels[i]});
  }
  auto resolve_s = [&](const Located& l) {
    auto it = s_index.find(l.id);
    if (it == s_index.end()) throw ModelError(l.pos, "unknown S state '" + l.id + "'");
    return it->second;
  };
  if (sys.s.states.empty()) throw ModelError(eof, "structure: no states");
  if (!s_init) throw ModelError(eof, "structure: missing init");
  sys.s.initial = resolve_s(*s_init);
  for (auto& t : s_trans) {
    STransition st{resolve_s(t.from), t.inv, resolve_s(t.to)};
    for (const auto& prev : sys.s.transitions) {
      if (prev.source == st.source && prev.target == st.target && prev.invariant == st.invariant) {
        throw ModelError(t.from.pos, "duplicate S transition " + t.from.id + " -> " + t.to.id);
      }
    }
    sys.s.transitions.push_back(std::move(st));
  }
  if (sys.name.empty()) sys.name = "unnamed";
  return sys;
}

SBSystem load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

// ---------------------------------------------------------------- printer

std::string print_model(const SBSystem& sys) {
  std::ostringstream out;
  out << "system " << sys.name << "\n\nobservables\n";
  for (std::size_t i = 0; i < sys.sig.size(); ++i) {
    out << "  " << sys.sig.name(i) << " : " << sys.sig.sort(i).describe() << "\n";
  }
  if (!sys.rules.empty()) {
    out << "\nbehaviour rules\n  init " << render_assignment(sys.sig, sys.b.states[sys.b.initial].obs) << "\n";
    for (const auto& rule : sys.rules) {
      out << "  rule " << rule.name << ": " << to_string(rule.guard) << " -> ";
      for (std::size_t i = 0; i < rule.updates.size(); ++i) {
        if (i) out << ", ";
        out << sys.sig.name(rule.updates[i].observable) << " := " << to_string(rule.updates[i].expr);
      }
      out << "\n";
    }
  } else {
    out << "\nbehaviour explicit\n";
    for (const auto& q : sys.b.states) {
      out << "  state " << q.id << " { " << render_assignment(sys.sig, q.obs) << " }\n";
    }
    out << "  init " << sys.b.states[sys.b.initial].id << "\n";
    for (auto [from, to] : sys.b.transitions) {
      out << "  trans " << sys.b.states[from].id << " -> " << sys.b.states[to].id << "\n";
    }
  }
  out << "\nstructure\n";
  for (const auto& r : sys.s.states) out << "  state " << r.id << " : " << to_string(r.label) << "\n";
  out << "  init " << sys.s.states[sys.s.initial].id << "\n";
  for (const auto& t : sys.s.transitions) {
    out << "  trans " << sys.s.states[t.source].id << " -> " << sys.s.states[t.target].id << " inv "
        << to_string(t.invariant) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- validation

namespace {

void check_formula(const SBSystem& sys, const Formula& f, const std::string& where,
                   std::vector<Diagnostic>& out) {
  if (f.root().type != FormulaType::Bool) {
    out.push_back({Diagnostic::Severity::Error, where + " is not a boolean formula"});
  }
  for (const auto& name : free_observables(f)) {
    if (!sys.sig.find(name)) {
      out.push_back({Diagnostic::Severity::Error, where + " mentions undeclared observable '" + name + "'"});
    }
  }
  // Re-parsing the rendering against the signature re-checks sorts.
  try {
    if (!(parse_formula(to_string(f), sys.sig) == f)) {
      out.push_back({Diagnostic::Severity::Error, where + " does not re-check against the signature"});
    }
  } catch (const FormulaError& e) {
    out.push_back({Diagnostic::Severity::Error, where + ": " + e.detail()});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const SBSystem& sys) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string msg) { out.push_back({Diagnostic::Severity::Error, std::move(msg)}); };

  const auto nq = sys.b.states.size();
  const auto nr = sys.s.states.size();
  if (nq == 0) error("behaviour has no states");
  if (nr == 0) error("structure has no states");

  std::set<std::string> ids;
  for (const auto& q : sys.b.states) {
    if (!ids.insert(q.id).second) error("duplicate B state id '" + q.id + "'");
    if (auto msg = check_observation(sys.sig, q.obs); !msg.empty()) error("B state '" + q.id + "': " + msg);
  }
  ids.clear();
  for (const auto& r : sys.s.states) {
    if (!ids.insert(r.id).second) error("duplicate S state id '" + r.id + "'");
    check_formula(sys, r.label, "label of S state '" + r.id + "'", out);
  }
  if (nq && sys.b.initial >= nq) error("initial B state out of range");
  if (nr && sys.s.initial >= nr) error("initial S state out of range");
  for (auto [from, to] : sys.b.transitions) {
    if (from >= nq || to >= nq) error("B transition with dangling endpoint");
  }
  for (std::size_t t = 0; t < sys.s.transitions.size(); ++t) {
    const auto& st = sys.s.transitions[t];
    if (st.source >= nr || st.target >= nr) {
      error("S transition with dangling endpoint");
      continue;
    }
    std::string where = "invariant of " + sys.s.states[st.source].id + " -> " + sys.s.states[st.target].id;
    check_formula(sys, st.invariant, where, out);
    for (std::size_t u = 0; u < t; ++u) {
      const auto& prev = sys.s.transitions[u];
      if (prev.source == st.source && prev.target == st.target && prev.invariant == st.invariant) {
        error("duplicate S transition " + sys.s.states[st.source].id + " -> " + sys.s.states[st.target].id);
      }
    }
  }
  bool structurally_ok = std::none_of(out.begin(), out.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
  if (structurally_ok && nq && nr) {
    const auto& q0 = sys.b.states[sys.b.initial];
    const auto& r0 = sys.s.states[sys.s.initial];
    if (!evaluate(r0.label, q0.obs)) {
      error("initial B state '" + q0.id + "' (" + render_assignment(sys.sig, q0.obs) +
            ") does not satisfy the constraints of initial S state '" + r0.id + "': " + to_string(r0.label));
    }
  }
  return out;
}

}  // namespace sbcheck
