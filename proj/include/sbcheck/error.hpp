#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbcheck {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Base class for every diagnostic raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while parsing or type-checking a constraint formula.
class FormulaError : public Error {
 public:
  enum class Kind { Syntax, UnknownObservable, SortMismatch, Range };

  FormulaError(Kind kind, SourcePos pos, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  SourcePos pos() const noexcept { return pos_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Kind kind_;
  SourcePos pos_;
  std::string detail_;
};

/// Raised while parsing a model file (structure, ids, references).
class ModelError : public Error {
 public:
  ModelError(SourcePos pos, const std::string& message);

  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

/// Raised by the CTL front end.
class CtlError : public Error {
 public:
  CtlError(std::size_t column, const std::string& message);

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

/// A violated precondition of a public operation.
class ContractError : public Error {
 public:
  using Error::Error;
};

const char* to_string(FormulaError::Kind kind);

}  // namespace sbcheck
