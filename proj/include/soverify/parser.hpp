// Parser for the .sospec specification language. One system per file plus
// any number of scenario and invariant blocks; see docs/grammar.md.

#pragma once

#include <string>

#include "soverify/system.hpp"

namespace soverify {

struct ParseError : SpecError {
  int line = 0;
  int col = 0;
  std::string production;

  ParseError(int line_, int col_, std::string production_, const std::string& what_)
      : SpecError("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) +
                  " in " + production_ + ": " + what_),
        line(line_), col(col_), production(std::move(production_)) {}
};

SpecFile parse_spec(const std::string& text);

// Parses a single formula against an existing system's signature, with
// variables bound by `binders`. Used by cmd_solve and by tests. Primed
// symbols are rejected, as in every surface context.
FormulaPtr parse_formula_in_system(const TwoLevelSystem& sys, const std::string& text,
                                   const std::vector<std::pair<std::string, SortId>>& binders = {});

// Parses a solve query file: (solve (consts (name Sort)...)? (formula f)).
// The listed constants are appended to `sig` so reports that Skolemized
// fresh constants can be replayed; returns the query formula.
FormulaPtr parse_solve_query(const TwoLevelSystem& sys, Signature& sig,
                             const std::string& text,
                             std::vector<FunId>* declared = nullptr);

} // namespace soverify
