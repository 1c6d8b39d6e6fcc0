#include "sbcheck/constraints.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <sstream>

namespace sbcheck {

// ---------------------------------------------------------------- sorts

Sort Sort::integer(Value lo, Value hi) {
  if (lo > hi) {
    throw Error("integer sort with empty range " + std::to_string(lo) + ".." + std::to_string(hi));
  }
  Sort s;
  s.kind_ = Kind::Int;
  s.lo_ = lo;
  s.hi_ = hi;
  return s;
}

Sort Sort::boolean() {
  Sort s;
  s.kind_ = Kind::Bool;
  return s;
}

Sort Sort::enumeration(std::vector<std::string> labels) {
  if (labels.empty()) throw Error("enum sort without labels");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) throw Error("duplicate enum label '" + labels[i] + "'");
    }
  }
  Sort s;
  s.kind_ = Kind::Enum;
  s.lo_ = 0;
  s.hi_ = static_cast<Value>(labels.size()) - 1;
  s.labels_ = std::move(labels);
  return s;
}

std::optional<std::size_t> Sort::label_index(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::string Sort::render(Value v) const {
  switch (kind_) {
    case Kind::Bool:
      return v != 0 ? "true" : "false";
    case Kind::Enum:
      if (v >= 0 && v < static_cast<Value>(labels_.size())) return labels_[static_cast<std::size_t>(v)];
      return "?" + std::to_string(v);
    case Kind::Int:
      break;
  }
  return std::to_string(v);
}

std::optional<Value> Sort::parse_value(std::string_view text) const {
  switch (kind_) {
    case Kind::Bool:
      if (text == "true" || text == "1") return 1;
      if (text == "false" || text == "0") return 0;
      return std::nullopt;
    case Kind::Enum:
      if (auto idx = label_index(text)) return static_cast<Value>(*idx);
      return std::nullopt;
    case Kind::Int: {
      Value v = 0;
      const char* first = text.data();
      const char* last = text.data() + text.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) return std::nullopt;
      if (!contains(v)) return std::nullopt;
      return v;
    }
  }
  return std::nullopt;
}

std::string Sort::describe() const {
  switch (kind_) {
    case Kind::Bool:
      return "bool";
    case Kind::Int:
      return "int " + std::to_string(lo_) + ".." + std::to_string(hi_);
    case Kind::Enum: {
      std::string out = "enum { ";
      for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (i) out += ", ";
        out += labels_[i];
      }
      return out + " }";
    }
  }
  return "?";
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool is_keyword(std::string_view s) { return s == "true" || s == "false"; }

}  // namespace

void Signature::add(std::string name, Sort sort) {
  if (!is_identifier(name) || is_keyword(name)) throw Error("invalid observable name '" + name + "'");
  if (index_.count(name)) throw Error("duplicate observable '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(sort));
}

std::optional<std::size_t> Signature::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Signature::is_enum_label(std::string_view label) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) {
    return e.second.kind() == Sort::Kind::Enum && e.second.label_index(label).has_value();
  });
}

std::string check_observation(const Signature& sig, const Observation& obs) {
  if (obs.values.size() != sig.size()) {
    return "observation has " + std::to_string(obs.values.size()) + " values, signature has " +
           std::to_string(sig.size());
  }
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (!sig.sort(i).contains(obs.values[i])) {
      return "value " + std::to_string(obs.values[i]) + " of '" + sig.name(i) + "' outside " +
             sig.sort(i).describe();
    }
  }
  return {};
}

std::string render_tuple(const Observation& obs) {
  std::string out = "(";
  for (std::size_t i = 0; i < obs.values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(obs.values[i]);
  }
  return out + ")";
}

std::string render_assignment(const Signature& sig, const Observation& obs) {
  std::string out;
  for (std::size_t i = 0; i < sig.size() && i < obs.values.size(); ++i) {
    if (i) out += ", ";
    out += sig.name(i) + "=" + sig.sort(i).render(obs.values[i]);
  }
  return out;
}

// ---------------------------------------------------------------- formula

Formula::Formula() : Formula(constant(true)) {}

Formula Formula::constant(bool value) {
  auto node = std::make_shared<FormulaNode>();
  node->op = FormulaOp::BoolConst;
  node->type = FormulaType::Bool;
  node->value = value ? 1 : 0;
  return Formula(std::move(node));
}

namespace {

bool nodes_equal(const FormulaNode& a, const FormulaNode& b) {
  if (a.op != b.op || a.type != b.type || a.value != b.value || a.name != b.name ||
      a.kids.size() != b.kids.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.kids.size(); ++i) {
    if (!nodes_equal(*a.kids[i], *b.kids[i])) return false;
  }
  return true;
}

}  // namespace

bool operator==(const Formula& a, const Formula& b) {
  return a.node() == b.node() || nodes_equal(a.root(), b.root());
}

// ---------------------------------------------------------------- lexer

namespace {

enum class Tok {
  Ident,
  Int,
  LParen,
  RParen,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  Lexer(std::string_view text, SourcePos origin) : text_(text), line_(origin.line), col_(origin.column) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      SourcePos pos{line_, col_};
      if (i_ >= text_.size()) {
        out.push_back({Tok::End, "", pos});
        return out;
      }
      char c = text_[i_];
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = i_;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
          advance();
        }
        out.push_back({Tok::Ident, std::string(text_.substr(start, i_ - start)), pos});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = i_;
        while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) advance();
        out.push_back({Tok::Int, std::string(text_.substr(start, i_ - start)), pos});
        continue;
      }
      out.push_back(punct(pos));
    }
  }

 private:
  Token punct(SourcePos pos) {
    auto starts = [&](std::string_view s) { return text_.substr(i_, s.size()) == s; };
    static constexpr std::pair<std::string_view, Tok> table[] = {
        {"<=>", Tok::Iff}, {"=>", Tok::Implies}, {"&&", Tok::And}, {"||", Tok::Or},
        {"==", Tok::Eq},   {"!=", Tok::Ne},      {"<=", Tok::Le},  {">=", Tok::Ge},
        {"<", Tok::Lt},    {">", Tok::Gt},       {"!", Tok::Not},  {"+", Tok::Plus},
        {"-", Tok::Minus}, {"*", Tok::Star},     {"(", Tok::LParen}, {")", Tok::RParen},
    };
    for (const auto& [spelling, kind] : table) {
      if (starts(spelling)) {
        for (std::size_t k = 0; k < spelling.size(); ++k) advance();
        return {kind, std::string(spelling), pos};
      }
    }
    throw FormulaError(FormulaError::Kind::Syntax, pos,
                       std::string("unexpected character '") + text_[i_] + "'");
  }

  void skip_space() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) advance();
  }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  std::size_t line_;
  std::size_t col_;
};

// ---------------------------------------------------------------- parser

using NodePtr = std::shared_ptr<FormulaNode>;

// A bare identifier that is not an observable: it may still become an enum
// label once the other side of an equality fixes the sort.
constexpr FormulaOp kPendingLabel = FormulaOp::EnumConst;

class Parser {
 public:
  Parser(std::vector<Token> toks, const Signature& sig) : toks_(std::move(toks)), sig_(sig) {}

  NodePtr parse_bool() {
    auto n = iff();
    expect_end();
    require_type(n, FormulaType::Bool, "constraint");
    return n;
  }

  NodePtr parse_int() {
    auto n = additive();
    expect_end();
    require_type(n, FormulaType::Int, "integer expression");
    return n;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  void expect_end() {
    if (peek().kind != Tok::End) {
      throw FormulaError(FormulaError::Kind::Syntax, peek().pos, "unexpected '" + peek().text + "'");
    }
  }

  [[noreturn]] void fail_syntax(const Token& t, const std::string& what) {
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw FormulaError(FormulaError::Kind::Syntax, t.pos, "expected " + what + ", found " + got);
  }

  NodePtr make(FormulaOp op, FormulaType type, std::vector<NodePtr> kids, SourcePos pos) {
    auto n = std::make_shared<FormulaNode>();
    n->op = op;
    n->type = type;
    for (auto& k : kids) n->kids.push_back(std::move(k));
    positions_[n.get()] = pos;
    return n;
  }

  SourcePos pos_of(const NodePtr& n) const {
    auto it = positions_.find(n.get());
    return it == positions_.end() ? SourcePos{} : it->second;
  }

  bool pending(const NodePtr& n) const { return n->op == kPendingLabel && n->sort_ref < 0; }

  [[noreturn]] void reject_pending(const NodePtr& n) {
    if (sig_.is_enum_label(n->name)) {
      throw FormulaError(FormulaError::Kind::SortMismatch, pos_of(n),
                         "enum label '" + n->name + "' used outside an equality");
    }
    throw FormulaError(FormulaError::Kind::UnknownObservable, pos_of(n), "'" + n->name + "'");
  }

  static const char* type_name(FormulaType t) {
    switch (t) {
      case FormulaType::Int:
        return "int";
      case FormulaType::Bool:
        return "bool";
      case FormulaType::Enum:
        return "enum";
    }
    return "?";
  }

  void require_type(const NodePtr& n, FormulaType t, const char* context) {
    if (pending(n)) reject_pending(n);
    if (n->type != t) {
      throw FormulaError(FormulaError::Kind::SortMismatch, pos_of(n),
                         std::string(context) + " expects " + type_name(t) + ", got " + type_name(n->type));
    }
  }

  // Binds a pending label to the enum sort of the observable `sort_ref`.
  void bind_label(const NodePtr& label, std::int32_t sort_ref) {
    const Sort& sort = sig_.sort(static_cast<std::size_t>(sort_ref));
    auto idx = sort.label_index(label->name);
    if (!idx) {
      if (!sig_.is_enum_label(label->name)) {
        throw FormulaError(FormulaError::Kind::UnknownObservable, pos_of(label), "'" + label->name + "'");
      }
      throw FormulaError(FormulaError::Kind::SortMismatch, pos_of(label),
                         "'" + label->name + "' is not a label of " + sort.describe());
    }
    label->value = static_cast<Value>(*idx);
    label->sort_ref = sort_ref;
  }

  // Binds a lone pending label to the first enum observable declaring it.
  void bind_label_anywhere(const NodePtr& label) {
    for (std::size_t i = 0; i < sig_.size(); ++i) {
      if (sig_.sort(i).kind() == Sort::Kind::Enum && sig_.sort(i).label_index(label->name)) {
        bind_label(label, static_cast<std::int32_t>(i));
        return;
      }
    }
    reject_pending(label);
  }

  NodePtr iff() {
    auto lhs = implies();
    while (peek().kind == Tok::Iff) {
      auto t = take();
      auto rhs = implies();
      lhs = logic(FormulaOp::Iff, lhs, rhs, t.pos);
    }
    return lhs;
  }

  NodePtr implies() {
    auto lhs = disjunction();
    if (peek().kind == Tok::Implies) {
      auto t = take();
      auto rhs = implies();  // right-associative
      return logic(FormulaOp::Implies, lhs, rhs, t.pos);
    }
    return lhs;
  }

  NodePtr disjunction() {
    auto lhs = conjunction();
    while (peek().kind == Tok::Or) {
      auto t = take();
      lhs = logic(FormulaOp::Or, lhs, conjunction(), t.pos);
    }
    return lhs;
  }

  NodePtr conjunction() {
    auto lhs = comparison();
    while (peek().kind == Tok::And) {
      auto t = take();
      lhs = logic(FormulaOp::And, lhs, comparison(), t.pos);
    }
    return lhs;
  }

  NodePtr logic(FormulaOp op, NodePtr a, NodePtr b, SourcePos pos) {
    require_type(a, FormulaType::Bool, "logical operator");
    require_type(b, FormulaType::Bool, "logical operator");
    return make(op, FormulaType::Bool, {std::move(a), std::move(b)}, pos);
  }

  static std::optional<FormulaOp> comparison_op(Tok k) {
    switch (k) {
      case Tok::Eq:
        return FormulaOp::Eq;
      case Tok::Ne:
        return FormulaOp::Ne;
      case Tok::Lt:
        return FormulaOp::Lt;
      case Tok::Le:
        return FormulaOp::Le;
      case Tok::Gt:
        return FormulaOp::Gt;
      case Tok::Ge:
        return FormulaOp::Ge;
      default:
        return std::nullopt;
    }
  }

  NodePtr comparison() {
    auto lhs = additive();
    auto op = comparison_op(peek().kind);
    if (!op) return lhs;
    auto t = take();
    auto rhs = additive();
    if (comparison_op(peek().kind)) {
      throw FormulaError(FormulaError::Kind::Syntax, peek().pos, "comparisons do not chain");
    }
    if (*op == FormulaOp::Eq || *op == FormulaOp::Ne) {
      if (pending(lhs) && !pending(rhs) && rhs->type == FormulaType::Enum) bind_label(lhs, rhs->sort_ref);
      if (pending(rhs) && !pending(lhs) && lhs->type == FormulaType::Enum) bind_label(rhs, lhs->sort_ref);
      if (pending(lhs) && pending(rhs)) {
        bind_label_anywhere(lhs);
        bind_label(rhs, lhs->sort_ref);
      }
      if (pending(lhs)) reject_pending(lhs);
      if (pending(rhs)) reject_pending(rhs);
      if (lhs->type != rhs->type) {
        throw FormulaError(FormulaError::Kind::SortMismatch, t.pos,
                           std::string("cannot compare ") + type_name(lhs->type) + " with " +
                               type_name(rhs->type));
      }
      if (lhs->type == FormulaType::Enum &&
          !(sig_.sort(static_cast<std::size_t>(lhs->sort_ref)) ==
            sig_.sort(static_cast<std::size_t>(rhs->sort_ref)))) {
        throw FormulaError(FormulaError::Kind::SortMismatch, t.pos, "comparison between different enum sorts");
      }
    } else {
      require_type(lhs, FormulaType::Int, "ordering comparison");
      require_type(rhs, FormulaType::Int, "ordering comparison");
    }
    return make(*op, FormulaType::Bool, {std::move(lhs), std::move(rhs)}, t.pos);
  }

  NodePtr additive() {
    auto lhs = multiplicative();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      auto t = take();
      auto rhs = multiplicative();
      lhs = arith(t.kind == Tok::Plus ? FormulaOp::Add : FormulaOp::Sub, lhs, rhs, t.pos);
    }
    return lhs;
  }

  NodePtr multiplicative() {
    auto lhs = unary();
    while (peek().kind == Tok::Star) {
      auto t = take();
      lhs = arith(FormulaOp::Mul, lhs, unary(), t.pos);
    }
    return lhs;
  }

  NodePtr arith(FormulaOp op, NodePtr a, NodePtr b, SourcePos pos) {
    require_type(a, FormulaType::Int, "arithmetic");
    require_type(b, FormulaType::Int, "arithmetic");
    return make(op, FormulaType::Int, {std::move(a), std::move(b)}, pos);
  }

  NodePtr unary() {
    if (peek().kind == Tok::Not) {
      auto t = take();
      auto operand = unary();
      require_type(operand, FormulaType::Bool, "negation");
      return make(FormulaOp::Not, FormulaType::Bool, {std::move(operand)}, t.pos);
    }
    if (peek().kind == Tok::Minus) {
      auto t = take();
      if (peek().kind == Tok::Int) {
        auto lit = take();
        return int_literal("-" + lit.text, t.pos);
      }
      auto operand = unary();
      require_type(operand, FormulaType::Int, "unary minus");
      return make(FormulaOp::Neg, FormulaType::Int, {std::move(operand)}, t.pos);
    }
    return primary();
  }

  NodePtr int_literal(const std::string& text, SourcePos pos) {
    Value v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw FormulaError(FormulaError::Kind::Range, pos, "integer literal " + text + " out of range");
    }
    auto n = make(FormulaOp::IntConst, FormulaType::Int, {}, pos);
    n->value = v;
    return n;
  }

  NodePtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: {
        auto lit = take();
        return int_literal(lit.text, lit.pos);
      }
      case Tok::LParen: {
        take();
        auto inner = iff();
        if (!accept(Tok::RParen)) fail_syntax(peek(), "')'");
        return inner;
      }
      case Tok::Ident: {
        auto id = take();
        if (id.text == "true" || id.text == "false") {
          auto n = make(FormulaOp::BoolConst, FormulaType::Bool, {}, id.pos);
          n->value = id.text == "true";
          return n;
        }
        if (auto idx = sig_.find(id.text)) {
          const Sort& sort = sig_.sort(*idx);
          FormulaType type = sort.kind() == Sort::Kind::Int    ? FormulaType::Int
                             : sort.kind() == Sort::Kind::Bool ? FormulaType::Bool
                                                               : FormulaType::Enum;
          auto n = make(FormulaOp::Var, type, {}, id.pos);
          n->value = static_cast<Value>(*idx);
          n->name = id.text;
          if (type == FormulaType::Enum) n->sort_ref = static_cast<std::int32_t>(*idx);
          return n;
        }
        auto n = make(kPendingLabel, FormulaType::Enum, {}, id.pos);
        n->name = id.text;
        return n;
      }
      default:
        fail_syntax(t, "a term");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Signature& sig_;
  std::unordered_map<const FormulaNode*, SourcePos> positions_;
};

// Interval bounds of integer terms. Rejects formulas whose intermediate
// values could leave the 64-bit range, which keeps evaluation exact.
using Wide = __int128;

struct Interval {
  Wide lo;
  Wide hi;
};

constexpr Wide kMin = std::numeric_limits<Value>::min();
constexpr Wide kMax = std::numeric_limits<Value>::max();

Interval bounds(const FormulaNode& n, const Signature& sig, SourcePos origin) {
  auto checked = [&](Interval iv) {
    if (iv.lo < kMin || iv.hi > kMax) {
      throw FormulaError(FormulaError::Kind::Range, origin, "integer term may exceed 64-bit range");
    }
    return iv;
  };
  switch (n.op) {
    case FormulaOp::IntConst:
      return {n.value, n.value};
    case FormulaOp::Var: {
      const Sort& s = sig.sort(static_cast<std::size_t>(n.value));
      return {s.lo(), s.hi()};
    }
    case FormulaOp::Neg: {
      auto a = bounds(*n.kids[0], sig, origin);
      return checked({-a.hi, -a.lo});
    }
    case FormulaOp::Add: {
      auto a = bounds(*n.kids[0], sig, origin);
      auto b = bounds(*n.kids[1], sig, origin);
      return checked({a.lo + b.lo, a.hi + b.hi});
    }
    case FormulaOp::Sub: {
      auto a = bounds(*n.kids[0], sig, origin);
      auto b = bounds(*n.kids[1], sig, origin);
      return checked({a.lo - b.hi, a.hi - b.lo});
    }
    case FormulaOp::Mul: {
      auto a = bounds(*n.kids[0], sig, origin);
      auto b = bounds(*n.kids[1], sig, origin);
      // Operands are within 64 bits, so each product fits in 128.
      Wide c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
      return checked({*std::min_element(c, c + 4), *std::max_element(c, c + 4)});
    }
    default:
      for (const auto& k : n.kids) bounds(*k, sig, origin);
      return {0, 1};
  }
}

}  // namespace

Formula parse_formula(std::string_view text, const Signature& sig, SourcePos origin) {
  Parser p(Lexer(text, origin).run(), sig);
  auto root = p.parse_bool();
  bounds(*root, sig, origin);
  return Formula(std::move(root));
}

Formula parse_int_expr(std::string_view text, const Signature& sig, SourcePos origin) {
  Parser p(Lexer(text, origin).run(), sig);
  auto root = p.parse_int();
  bounds(*root, sig, origin);
  return Formula(std::move(root));
}

// ---------------------------------------------------------------- evaluation

namespace {

Value eval(const FormulaNode& n, const Observation& o) {
  switch (n.op) {
    case FormulaOp::BoolConst:
    case FormulaOp::IntConst:
    case FormulaOp::EnumConst:
      return n.value;
    case FormulaOp::Var:
      return o.values[static_cast<std::size_t>(n.value)];
    case FormulaOp::Neg:
      return -eval(*n.kids[0], o);
    case FormulaOp::Add:
      return eval(*n.kids[0], o) + eval(*n.kids[1], o);
    case FormulaOp::Sub:
      return eval(*n.kids[0], o) - eval(*n.kids[1], o);
    case FormulaOp::Mul:
      return eval(*n.kids[0], o) * eval(*n.kids[1], o);
    case FormulaOp::Eq:
      return eval(*n.kids[0], o) == eval(*n.kids[1], o);
    case FormulaOp::Ne:
      return eval(*n.kids[0], o) != eval(*n.kids[1], o);
    case FormulaOp::Lt:
      return eval(*n.kids[0], o) < eval(*n.kids[1], o);
    case FormulaOp::Le:
      return eval(*n.kids[0], o) <= eval(*n.kids[1], o);
    case FormulaOp::Gt:
      return eval(*n.kids[0], o) > eval(*n.kids[1], o);
    case FormulaOp::Ge:
      return eval(*n.kids[0], o) >= eval(*n.kids[1], o);
    case FormulaOp::Not:
      return !eval(*n.kids[0], o);
    case FormulaOp::And:
      return eval(*n.kids[0], o) && eval(*n.kids[1], o);
    case FormulaOp::Or:
      return eval(*n.kids[0], o) || eval(*n.kids[1], o);
    case FormulaOp::Implies:
      return !eval(*n.kids[0], o) || eval(*n.kids[1], o);
    case FormulaOp::Iff:
      return (eval(*n.kids[0], o) != 0) == (eval(*n.kids[1], o) != 0);
  }
  return 0;
}

void collect_vars(const FormulaNode& n, std::set<std::string>& out) {
  if (n.op == FormulaOp::Var) out.insert(n.name);
  for (const auto& k : n.kids) collect_vars(*k, out);
}

}  // namespace

bool evaluate(const Formula& phi, const Observation& obs) { return eval(phi.root(), obs) != 0; }

Value evaluate_term(const Formula& term, const Observation& obs) { return eval(term.root(), obs); }

std::set<std::string> free_observables(const Formula& phi) {
  std::set<std::string> out;
  collect_vars(phi.root(), out);
  return out;
}

// ---------------------------------------------------------------- printing

namespace {

// Larger binds tighter.
int precedence(FormulaOp op) {
  switch (op) {
    case FormulaOp::Iff:
      return 1;
    case FormulaOp::Implies:
      return 2;
    case FormulaOp::Or:
      return 3;
    case FormulaOp::And:
      return 4;
    case FormulaOp::Eq:
    case FormulaOp::Ne:
    case FormulaOp::Lt:
    case FormulaOp::Le:
    case FormulaOp::Gt:
    case FormulaOp::Ge:
      return 5;
    case FormulaOp::Add:
    case FormulaOp::Sub:
      return 6;
    case FormulaOp::Mul:
      return 7;
    case FormulaOp::Not:
    case FormulaOp::Neg:
      return 8;
    default:
      return 9;
  }
}

const char* spelling(FormulaOp op) {
  switch (op) {
    case FormulaOp::Iff:
      return " <=> ";
    case FormulaOp::Implies:
      return " => ";
    case FormulaOp::Or:
      return " || ";
    case FormulaOp::And:
      return " && ";
    case FormulaOp::Eq:
      return " == ";
    case FormulaOp::Ne:
      return " != ";
    case FormulaOp::Lt:
      return " < ";
    case FormulaOp::Le:
      return " <= ";
    case FormulaOp::Gt:
      return " > ";
    case FormulaOp::Ge:
      return " >= ";
    case FormulaOp::Add:
      return " + ";
    case FormulaOp::Sub:
      return " - ";
    case FormulaOp::Mul:
      return " * ";
    default:
      return "";
  }
}

void print(const FormulaNode& n, std::string& out);

void print_child(const FormulaNode& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const FormulaNode& n, std::string& out) {
  switch (n.op) {
    case FormulaOp::BoolConst:
      out += n.value ? "true" : "false";
      return;
    case FormulaOp::IntConst:
      out += std::to_string(n.value);
      return;
    case FormulaOp::EnumConst:
    case FormulaOp::Var:
      out += n.name;
      return;
    case FormulaOp::Not:
    case FormulaOp::Neg: {
      out += n.op == FormulaOp::Not ? "!" : "-";
      const auto& k = *n.kids[0];
      // `-(3)` must not collapse into a literal on re-parse.
      bool parens = precedence(k.op) < precedence(n.op) || (n.op == FormulaOp::Neg && k.op == FormulaOp::IntConst);
      print_child(k, parens, out);
      return;
    }
    default:
      break;
  }
  int p = precedence(n.op);
  const auto& a = *n.kids[0];
  const auto& b = *n.kids[1];
  bool right_assoc = n.op == FormulaOp::Implies;
  bool non_assoc = p == 5;
  bool lp = precedence(a.op) < p || (precedence(a.op) == p && (right_assoc || non_assoc));
  bool rp = precedence(b.op) < p || (precedence(b.op) == p && (!right_assoc || non_assoc));
  print_child(a, lp, out);
  out += spelling(n.op);
  print_child(b, rp, out);
}

}  // namespace

std::string to_string(const Formula& phi) {
  std::string out;
  print(phi.root(), out);
  return out;
}

}  // namespace sbcheck
