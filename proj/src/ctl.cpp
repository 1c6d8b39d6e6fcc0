#include "sbcheck/ctl.hpp"

#include <algorithm>
#include <cctype>
#include <queue>

#include "graph.hpp"

namespace sbcheck {

// ---------------------------------------------------------------- AST

Ctl Ctl::top() { return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::True, Atom::Progress, {}})); }
Ctl Ctl::bottom() { return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::False, Atom::Progress, {}})); }
Ctl Ctl::atom(Atom a) { return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::Atom, a, {}})); }
Ctl Ctl::neg(Ctl f) { return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::Not, Atom::Progress, {std::move(f)}})); }
Ctl Ctl::conj(Ctl a, Ctl b) {
  return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::And, Atom::Progress, {std::move(a), std::move(b)}}));
}
Ctl Ctl::disj(Ctl a, Ctl b) {
  return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::Or, Atom::Progress, {std::move(a), std::move(b)}}));
}
Ctl Ctl::implies(Ctl a, Ctl b) {
  return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::Implies, Atom::Progress, {std::move(a), std::move(b)}}));
}
Ctl Ctl::ex(Ctl f) { return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::EX, Atom::Progress, {std::move(f)}})); }
Ctl Ctl::eu(Ctl a, Ctl b) {
  return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::EU, Atom::Progress, {std::move(a), std::move(b)}}));
}
Ctl Ctl::au(Ctl a, Ctl b) {
  return Ctl(std::make_shared<CtlNode>(CtlNode{CtlOp::AU, Atom::Progress, {std::move(a), std::move(b)}}));
}
Ctl Ctl::ax(Ctl f) { return neg(ex(neg(std::move(f)))); }
Ctl Ctl::ef(Ctl f) { return eu(top(), std::move(f)); }
Ctl Ctl::af(Ctl f) { return au(top(), std::move(f)); }
Ctl Ctl::eg(Ctl f) { return neg(af(neg(std::move(f)))); }
Ctl Ctl::ag(Ctl f) { return neg(ef(neg(std::move(f)))); }

CtlOp Ctl::op() const noexcept { return node_->op; }
Atom Ctl::atom_value() const noexcept { return node_->atom; }
const Ctl& Ctl::kid(std::size_t i) const { return node_->kids.at(i); }
std::size_t Ctl::arity() const noexcept { return node_->kids.size(); }

std::size_t Ctl::depth() const {
  std::size_t d = 0;
  for (const auto& k : node_->kids) d = std::max(d, k.depth() + 1);
  return d;
}

std::size_t Ctl::size() const {
  std::size_t s = 1;
  for (const auto& k : node_->kids) s += k.size();
  return s;
}

bool operator==(const Ctl& a, const Ctl& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op() || a.arity() != b.arity()) return false;
  if (a.op() == CtlOp::Atom && a.atom_value() != b.atom_value()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!(a.kid(i) == b.kid(i))) return false;
  }
  return true;
}

Ctl weak_inner() {
  return Ctl::conj(Ctl::implies(Ctl::atom(Atom::Adapting), Ctl::ef(Ctl::atom(Atom::Steady))),
                   Ctl::atom(Atom::Progress));
}
Ctl strong_inner() {
  return Ctl::conj(Ctl::implies(Ctl::atom(Atom::Adapting), Ctl::af(Ctl::atom(Atom::Steady))),
                   Ctl::atom(Atom::Progress));
}
Ctl weak_formula() { return Ctl::eg(weak_inner()); }
Ctl strong_formula() { return Ctl::ag(strong_inner()); }

// ---------------------------------------------------------------- parser

namespace {

class CtlParser {
 public:
  explicit CtlParser(std::string_view text) : s_(text) {}

  Ctl parse() {
    Ctl f = implication();
    skip();
    if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw CtlError(i_ + 1, msg); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool lit(std::string_view t) {
    skip();
    if (s_.substr(i_, t.size()) != t) return false;
    i_ += t.size();
    return true;
  }

  void expect(std::string_view t) {
    if (!lit(t)) fail("expected '" + std::string(t) + "'");
  }

  std::string peek_word() {
    skip();
    std::size_t j = i_;
    while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
    return std::string(s_.substr(i_, j - i_));
  }

  Ctl implication() {
    Ctl lhs = disjunction();
    if (lit("=>")) return Ctl::implies(std::move(lhs), implication());
    return lhs;
  }

  Ctl disjunction() {
    Ctl f = conjunction();
    while (lit("||")) f = Ctl::disj(std::move(f), conjunction());
    return f;
  }

  Ctl conjunction() {
    Ctl f = unary();
    while (lit("&&")) f = Ctl::conj(std::move(f), unary());
    return f;
  }

  Ctl until(bool universal) {
    expect("[");
    Ctl a = implication();
    skip();
    if (peek_word() != "U") fail("expected 'U'");
    i_ += 1;
    Ctl b = implication();
    expect("]");
    return universal ? Ctl::au(std::move(a), std::move(b)) : Ctl::eu(std::move(a), std::move(b));
  }

  Ctl unary() {
    skip();
    if (lit("!")) return Ctl::neg(unary());
    if (lit("(")) {
      Ctl f = implication();
      expect(")");
      return f;
    }
    const std::size_t start = i_;
    std::string w = peek_word();
    if (w.empty()) {
      if (i_ >= s_.size()) fail("unexpected end of formula");
      fail("unexpected '" + std::string(1, s_[i_]) + "'");
    }
    i_ += w.size();
    if (w == "EX") return Ctl::ex(unary());
    if (w == "AX") return Ctl::ax(unary());
    if (w == "EF") return Ctl::ef(unary());
    if (w == "AF") return Ctl::af(unary());
    if (w == "EG") return Ctl::eg(unary());
    if (w == "AG") return Ctl::ag(unary());
    if (w == "E") return until(false);
    if (w == "A") return until(true);
    if (w == "true") return Ctl::top();
    if (w == "false") return Ctl::bottom();
    if (w == "adapting") return Ctl::atom(Atom::Adapting);
    if (w == "steady") return Ctl::atom(Atom::Steady);
    if (w == "progress") return Ctl::atom(Atom::Progress);
    throw CtlError(start + 1, "unknown atom '" + w + "' (expected adapting, steady or progress)");
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

int precedence(CtlOp op) {
  switch (op) {
    case CtlOp::Implies:
      return 1;
    case CtlOp::Or:
      return 2;
    case CtlOp::And:
      return 3;
    default:
      return 4;
  }
}

void print(const Ctl& f, int ctx, std::string& out) {
  const int prec = precedence(f.op());
  const bool paren = prec < ctx;
  if (paren) out += '(';
  switch (f.op()) {
    case CtlOp::True:
      out += "true";
      break;
    case CtlOp::False:
      out += "false";
      break;
    case CtlOp::Atom:
      out += to_string(f.atom_value());
      break;
    case CtlOp::Not:
      out += '!';
      print(f.kid(0), 4, out);
      break;
    case CtlOp::EX:
      out += "EX ";
      print(f.kid(0), 4, out);
      break;
    case CtlOp::EU:
    case CtlOp::AU:
      out += f.op() == CtlOp::EU ? "E[" : "A[";
      print(f.kid(0), 0, out);
      out += " U ";
      print(f.kid(1), 0, out);
      out += ']';
      break;
    case CtlOp::And:
      print(f.kid(0), 3, out);
      out += " && ";
      print(f.kid(1), 4, out);
      break;
    case CtlOp::Or:
      print(f.kid(0), 2, out);
      out += " || ";
      print(f.kid(1), 3, out);
      break;
    case CtlOp::Implies:
      print(f.kid(0), 2, out);
      out += " => ";
      print(f.kid(1), 1, out);
      break;
  }
  if (paren) out += ')';
}

}  // namespace

Ctl parse_ctl(std::string_view text) { return CtlParser(text).parse(); }

std::string to_string(const Ctl& f) {
  std::string out;
  print(f, 0, out);
  return out;
}

// ---------------------------------------------------------------- sat sets

std::size_t SatSet::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<StateIndex> SatSet::indices() const {
  std::vector<StateIndex> out;
  for (StateIndex t = 0; t < bits_.size(); ++t) {
    if (bits_[t]) out.push_back(t);
  }
  return out;
}

namespace {

std::uint8_t atom_bit(Atom a) { return static_cast<std::uint8_t>(a); }

SatSet fast(const Kripke& k, const Ctl& f) {
  const auto n = k.size();
  const auto sn = static_cast<std::int64_t>(n);
  SatSet out(n);
  std::uint8_t* o = out.data();
  switch (f.op()) {
    case CtlOp::True:
      return SatSet(n, true);
    case CtlOp::False:
      return out;
    case CtlOp::Atom: {
      const auto bit = atom_bit(f.atom_value());
#pragma omp parallel for schedule(static)
      for (std::int64_t t = 0; t < sn; ++t) o[t] = (k.labels(static_cast<StateIndex>(t)).bits() & bit) != 0;
      return out;
    }
    case CtlOp::Not: {
      SatSet a = fast(k, f.kid(0));
      const std::uint8_t* pa = a.data();
#pragma omp parallel for schedule(static)
      for (std::int64_t t = 0; t < sn; ++t) o[t] = !pa[t];
      return out;
    }
    case CtlOp::And:
    case CtlOp::Or:
    case CtlOp::Implies: {
      SatSet a = fast(k, f.kid(0));
      SatSet b = fast(k, f.kid(1));
      const std::uint8_t* pa = a.data();
      const std::uint8_t* pb = b.data();
      const CtlOp op = f.op();
#pragma omp parallel for schedule(static)
      for (std::int64_t t = 0; t < sn; ++t) {
        o[t] = op == CtlOp::And ? (pa[t] && pb[t]) : op == CtlOp::Or ? (pa[t] || pb[t]) : (!pa[t] || pb[t]);
      }
      return out;
    }
    case CtlOp::EX: {
      SatSet a = fast(k, f.kid(0));
      const std::uint8_t* pa = a.data();
#pragma omp parallel for schedule(static)
      for (std::int64_t t = 0; t < sn; ++t) {
        for (StateIndex u : k.successors(static_cast<StateIndex>(t))) {
          if (pa[u]) {
            o[t] = 1;
            break;
          }
        }
      }
      return out;
    }
    case CtlOp::EU: {
      SatSet a = fast(k, f.kid(0));
      SatSet b = fast(k, f.kid(1));
      std::vector<StateIndex> work;
      for (StateIndex t = 0; t < n; ++t) {
        if (b.contains(t)) {
          o[t] = 1;
          work.push_back(t);
        }
      }
      while (!work.empty()) {
        StateIndex u = work.back();
        work.pop_back();
        for (StateIndex p : k.predecessors(u)) {
          if (!o[p] && a.contains(p)) {
            o[p] = 1;
            work.push_back(p);
          }
        }
      }
      return out;
    }
    case CtlOp::AU: {
      SatSet a = fast(k, f.kid(0));
      SatSet b = fast(k, f.kid(1));
      std::vector<std::uint32_t> remaining(n);
      for (StateIndex t = 0; t < n; ++t) remaining[t] = static_cast<std::uint32_t>(k.successors(t).size());
      std::vector<StateIndex> work;
      for (StateIndex t = 0; t < n; ++t) {
        if (b.contains(t)) {
          o[t] = 1;
          work.push_back(t);
        }
      }
      while (!work.empty()) {
        StateIndex u = work.back();
        work.pop_back();
        for (StateIndex p : k.predecessors(u)) {
          if (o[p] || !a.contains(p)) continue;
          if (--remaining[p] == 0) {
            o[p] = 1;
            work.push_back(p);
          }
        }
      }
      return out;
    }
  }
  return out;
}

SatSet naive(const Kripke& k, const Ctl& f) {
  const auto n = k.size();
  SatSet out(n);
  switch (f.op()) {
    case CtlOp::True:
      return SatSet(n, true);
    case CtlOp::False:
      return out;
    case CtlOp::Atom:
      for (StateIndex t = 0; t < n; ++t) out.set(t, k.labels(t).has(f.atom_value()));
      return out;
    case CtlOp::Not: {
      SatSet a = naive(k, f.kid(0));
      for (StateIndex t = 0; t < n; ++t) out.set(t, !a.contains(t));
      return out;
    }
    case CtlOp::And:
    case CtlOp::Or:
    case CtlOp::Implies: {
      SatSet a = naive(k, f.kid(0));
      SatSet b = naive(k, f.kid(1));
      for (StateIndex t = 0; t < n; ++t) {
        bool x = a.contains(t), y = b.contains(t);
        out.set(t, f.op() == CtlOp::And ? (x && y) : f.op() == CtlOp::Or ? (x || y) : (!x || y));
      }
      return out;
    }
    case CtlOp::EX: {
      SatSet a = naive(k, f.kid(0));
      for (StateIndex t = 0; t < n; ++t) {
        auto s = k.successors(t);
        out.set(t, std::any_of(s.begin(), s.end(), [&](StateIndex u) { return a.contains(u); }));
      }
      return out;
    }
    case CtlOp::EU:
    case CtlOp::AU: {
      // Least fixpoint Z = b | (a & pre(Z)), pre existential or universal.
      SatSet a = naive(k, f.kid(0));
      SatSet b = naive(k, f.kid(1));
      const bool universal = f.op() == CtlOp::AU;
      SatSet z(n);
      while (true) {
        SatSet next(n);
        for (StateIndex t = 0; t < n; ++t) {
          auto s = k.successors(t);
          bool pre = universal ? std::all_of(s.begin(), s.end(), [&](StateIndex u) { return z.contains(u); })
                               : std::any_of(s.begin(), s.end(), [&](StateIndex u) { return z.contains(u); });
          next.set(t, b.contains(t) || (a.contains(t) && pre));
        }
        if (next == z) return z;
        z = std::move(next);
      }
    }
  }
  return out;
}

}  // namespace

SatSet sat_set(const Kripke& k, const Ctl& phi) { return fast(k, phi); }

SatSet sat_set_reference(const Kripke& k, const Ctl& phi) { return naive(k, phi); }

bool holds_at(const Kripke& k, const Ctl& phi, StateIndex t) {
  if (t >= k.size()) throw ContractError("state index out of range");
  return sat_set(k, phi).contains(t);
}

// ---------------------------------------------------------------- evidence

namespace {

// Breadth-first path from `t` to the first state accepted by `goal`,
// moving only through states accepted by `through`.
template <class Goal, class Through>
std::vector<StateIndex> bfs_path(const Kripke& k, StateIndex t, Goal&& goal, Through&& through) {
  std::vector<StateIndex> parent(k.size(), UINT32_MAX);
  std::queue<StateIndex> q;
  parent[t] = t;
  q.push(t);
  while (!q.empty()) {
    StateIndex u = q.front();
    q.pop();
    if (goal(u)) {
      std::vector<StateIndex> path{u};
      while (path.back() != t) path.push_back(parent[path.back()]);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (StateIndex v : k.successors(u)) {
      if (parent[v] == UINT32_MAX && through(v)) {
        parent[v] = u;
        q.push(v);
      }
    }
  }
  return {};
}

}  // namespace

Lasso witness_eg(const Kripke& k, const Ctl& inner, StateIndex t) { return witness_eg(k, sat_set(k, inner), t); }

Lasso witness_eg(const Kripke& k, const SatSet& inner, StateIndex t) {
  if (t >= k.size()) throw ContractError("state index out of range");
  const auto n = static_cast<std::uint32_t>(k.size());
  auto sccs = detail::strongly_connected(
      n, [&](std::uint32_t v) { return k.successors(v); }, [&](std::uint32_t v) { return inner.contains(v); });
  auto on_cycle = [&](StateIndex v) { return sccs.comp[v] >= 0 && sccs.cyclic[sccs.comp[v]]; };
  auto in = [&](StateIndex v) { return inner.contains(v); };
  if (!in(t)) throw ContractError("witness_eg: state does not satisfy EG of the given formula");
  auto stem = bfs_path(k, t, on_cycle, in);
  if (stem.empty()) throw ContractError("witness_eg: state does not satisfy EG of the given formula");

  const StateIndex head = stem.back();
  stem.pop_back();
  Lasso l;
  l.prefix = std::move(stem);
  // Shortest loop back to `head` inside its own component.
  const auto comp = sccs.comp[head];
  auto same = [&](StateIndex v) { return sccs.comp[v] == comp; };
  for (StateIndex v : k.successors(head)) {
    if (v == head) {
      l.cycle = {head};
      return l;
    }
  }
  std::vector<StateIndex> parent(k.size(), UINT32_MAX);
  std::queue<StateIndex> q;
  for (StateIndex v : k.successors(head)) {
    if (same(v) && parent[v] == UINT32_MAX) {
      parent[v] = head;
      q.push(v);
    }
  }
  while (!q.empty()) {
    StateIndex u = q.front();
    q.pop();
    for (StateIndex v : k.successors(u)) {
      if (v == head) {
        std::vector<StateIndex> back{u};
        while (parent[back.back()] != head) back.push_back(parent[back.back()]);
        back.push_back(head);
        std::reverse(back.begin(), back.end());
        l.cycle = std::move(back);
        return l;
      }
      if (same(v) && parent[v] == UINT32_MAX) {
        parent[v] = u;
        q.push(v);
      }
    }
  }
  throw ContractError("witness_eg: cycle reconstruction failed");
}

std::vector<StateIndex> counterexample_ag(const Kripke& k, const Ctl& inner, StateIndex t) {
  return counterexample_ag(k, sat_set(k, inner), t);
}

std::vector<StateIndex> counterexample_ag(const Kripke& k, const SatSet& inner, StateIndex t) {
  if (t >= k.size()) throw ContractError("state index out of range");
  auto path = bfs_path(
      k, t, [&](StateIndex v) { return !inner.contains(v); }, [](StateIndex) { return true; });
  if (path.empty()) throw ContractError("counterexample_ag: state satisfies AG of the given formula");
  return path;
}

bool lasso_valid(const Kripke& k, const Lasso& l, const SatSet& inner, StateIndex t) {
  if (l.cycle.empty()) return false;
  std::vector<StateIndex> walk = l.prefix;
  walk.insert(walk.end(), l.cycle.begin(), l.cycle.end());
  walk.push_back(l.cycle.front());
  if (walk.front() != t) return false;
  for (std::size_t i = 0; i < walk.size(); ++i) {
    if (walk[i] >= k.size() || !inner.contains(walk[i])) return false;
    if (i + 1 < walk.size()) {
      auto s = k.successors(walk[i]);
      if (std::find(s.begin(), s.end(), walk[i + 1]) == s.end()) return false;
    }
  }
  return true;
}

}  // namespace sbcheck
