#pragma once

// Quantifier-free constraint language over typed observables.
//
// Every sort is backed by 64-bit integers: bounded integers hold their own
// value, booleans hold 0/1 and enum sorts hold the label index.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sbcheck/error.hpp"

namespace sbcheck {

using Value = std::int64_t;

class Sort {
 public:
  enum class Kind : std::uint8_t { Int, Bool, Enum };

  static Sort integer(Value lo, Value hi);
  static Sort boolean();
  static Sort enumeration(std::vector<std::string> labels);

  Kind kind() const noexcept { return kind_; }
  Value lo() const noexcept { return lo_; }
  Value hi() const noexcept { return hi_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  bool contains(Value v) const noexcept { return v >= lo_ && v <= hi_; }
  std::size_t cardinality() const noexcept { return static_cast<std::size_t>(hi_ - lo_ + 1); }
  std::optional<std::size_t> label_index(std::string_view label) const;

  std::string render(Value v) const;
  /// Parses a value literal (`3`, `true`, `M`) for this sort.
  std::optional<Value> parse_value(std::string_view text) const;
  /// `int 0..3`, `bool`, `enum { M, S }`.
  std::string describe() const;

  friend bool operator==(const Sort&, const Sort&) = default;

 private:
  Sort() = default;

  Kind kind_ = Kind::Bool;
  Value lo_ = 0;
  Value hi_ = 1;
  std::vector<std::string> labels_;
};

/// Ordered set of observables `name : sort`.
class Signature {
 public:
  void add(std::string name, Sort sort);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::optional<std::size_t> find(std::string_view name) const;
  const std::string& name(std::size_t i) const { return entries_.at(i).first; }
  const Sort& sort(std::size_t i) const { return entries_.at(i).second; }

  /// True when some enum sort in the signature declares `label`.
  bool is_enum_label(std::string_view label) const;

  friend bool operator==(const Signature& a, const Signature& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, Sort>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Total assignment of values to the observables of a signature, in
/// signature order.
struct Observation {
  std::vector<Value> values;

  friend bool operator==(const Observation&, const Observation&) = default;
  friend auto operator<=>(const Observation&, const Observation&) = default;
};

/// Empty string when `obs` is total and sort-conforming, else a message.
std::string check_observation(const Signature& sig, const Observation& obs);
/// `(0,1,2)`, the canonical id of an observation vector.
std::string render_tuple(const Observation& obs);
/// `r=M, v=V0, c=0`.
std::string render_assignment(const Signature& sig, const Observation& obs);

enum class FormulaOp : std::uint8_t {
  BoolConst,
  IntConst,
  EnumConst,
  Var,
  Neg,
  Add,
  Sub,
  Mul,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Not,
  And,
  Or,
  Implies,
  Iff,
};

enum class FormulaType : std::uint8_t { Int, Bool, Enum };

struct FormulaNode {
  FormulaOp op;
  FormulaType type;
  /// Constant value, label index, or observable index for `Var`.
  Value value = 0;
  /// Observable name or enum label, for printing.
  std::string name;
  /// For enum-typed nodes: an observable whose sort defines the enum.
  std::int32_t sort_ref = -1;
  std::vector<std::shared_ptr<const FormulaNode>> kids;
};

using FormulaNodePtr = std::shared_ptr<const FormulaNode>;

/// Immutable, well-sorted constraint. Cheap to copy.
class Formula {
 public:
  Formula();  // `true`
  explicit Formula(FormulaNodePtr root) : root_(std::move(root)) {}

  static Formula constant(bool value);

  const FormulaNode& root() const noexcept { return *root_; }
  const FormulaNodePtr& node() const noexcept { return root_; }

  bool is_true_constant() const noexcept {
    return root_->op == FormulaOp::BoolConst && root_->value != 0;
  }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  FormulaNodePtr root_;
};

/// Parses `text` against `sig`. `origin` offsets reported positions when the
/// formula is embedded in a larger file.
Formula parse_formula(std::string_view text, const Signature& sig, SourcePos origin = {});
/// Parses an integer-valued term (the right-hand side of a rule update).
Formula parse_int_expr(std::string_view text, const Signature& sig, SourcePos origin = {});

bool evaluate(const Formula& phi, const Observation& obs);
/// Value of an integer term; booleans as 0/1, enums as label index.
Value evaluate_term(const Formula& term, const Observation& obs);

std::set<std::string> free_observables(const Formula& phi);

/// Precedence-aware rendering; `parse_formula(to_string(f)) == f`.
std::string to_string(const Formula& phi);

}  // namespace sbcheck
