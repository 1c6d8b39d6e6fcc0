#include "sbcheck/error.hpp"

namespace sbcheck {

namespace {

std::string located(SourcePos pos, const std::string& message) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message;
}

}  // namespace

FormulaError::FormulaError(Kind kind, SourcePos pos, const std::string& message)
    : Error(located(pos, std::string(to_string(kind)) + ": " + message)),
      kind_(kind),
      pos_(pos),
      detail_(message) {}

ModelError::ModelError(SourcePos pos, const std::string& message)
    : Error(located(pos, message)), pos_(pos) {}

CtlError::CtlError(std::size_t column, const std::string& message)
    : Error("column " + std::to_string(column) + ": " + message), column_(column) {}

const char* to_string(FormulaError::Kind kind) {
  switch (kind) {
    case FormulaError::Kind::Syntax:
      return "syntax error";
    case FormulaError::Kind::UnknownObservable:
      return "unknown observable";
    case FormulaError::Kind::SortMismatch:
      return "sort mismatch";
    case FormulaError::Kind::Range:
      return "arithmetic range";
  }
  return "error";
}

}  // namespace sbcheck
