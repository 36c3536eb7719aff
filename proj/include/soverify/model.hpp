// Finite first-order structures: the solver returns (partial) ones as
// satisfying models, the test oracles enumerate (total) ones, and the
// report layer prints them as (v, b) SO-state pairs.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "soverify/logic.hpp"

namespace soverify {

struct FiniteStructure {
  // symbol key: id plus primed flag (post-state copies of state symbols)
  using FunKey = std::pair<FunId, bool>;
  using PredKey = std::pair<PredId, bool>;
  using Env = std::map<std::string, int>;

  std::vector<std::vector<std::string>> domains;          // indexed by SortId
  std::map<FunKey, std::map<std::vector<int>, int>> funcs; // possibly partial
  std::map<PredKey, std::set<std::vector<int>>> preds;     // true tuples

  int domain_size(SortId s) const {
    return static_cast<size_t>(s) < domains.size()
               ? static_cast<int>(domains[static_cast<size_t>(s)].size())
               : 0;
  }

  std::optional<int> eval_term(const TermPtr& t, const Env& env) const;
  // Quantifiers range over the listed domains; nullopt when a function
  // entry needed for evaluation is missing (partial structure).
  std::optional<bool> eval(const FormulaPtr& f, const Env& env = {}) const;

  // True when every listed literal (atom or negated atom) evaluates true.
  bool satisfies_literals(const std::vector<FormulaPtr>& literals) const;
};

// Splits a literal into its atom and sign; the input must be an Atom/Eq
// node or the negation of one.
std::pair<FormulaPtr, bool> literal_parts(const FormulaPtr& lit);

} // namespace soverify
