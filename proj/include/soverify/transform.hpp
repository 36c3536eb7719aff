// The formula transformations behind the verification-condition
// constructions: capture-avoiding substitution, beta-reduction of
// post-state symbols through transition updates, Skolemization of
// outer existentials, and ground instantiation of forall-Id prefixes.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "soverify/system.hpp"

namespace soverify {

struct SubstitutionError : SpecError {
  using SpecError::SpecError;
};

using VarMap = std::map<std::string, TermPtr>;

// Replaces free occurrences of mapped variables; renames bound variables
// when they would capture. Throws SubstitutionError naming the variable on
// a sort mismatch.
TermPtr substitute(const Signature& sig, const TermPtr& t, const VarMap& m);
FormulaPtr substitute(const Signature& sig, const FormulaPtr& f, const VarMap& m);

// Replaces every unprimed occurrence of a state variable or state predicate
// by its primed version (used to move a post-state formula into the primed
// vocabulary of Eq-(4)-style obligations).
FormulaPtr prime_state_symbols(const Signature& sig, const FormulaPtr& f);

// beta-reduces away every primed symbol: x' becomes its update term and
// p'(t...) becomes the update definition instantiated with t... .
// Requires f quantifier-free in the primed symbols and an entry for every
// primed symbol that occurs; definitions must themselves be prime-free.
FormulaPtr apply_updates(const Signature& sig, const FormulaPtr& f,
                         const std::map<FunId, TermPtr>& wf_updates,
                         const std::map<PredId, PredicateUpdate>& pm_updates);

struct SkolemResult {
  FormulaPtr formula;
  std::vector<std::pair<std::string, FunId>> constants;  // bound name -> fresh constant
};

// Strips an outermost block of existentials, adding fresh constants to the
// signature. Constant names are <prefix><var-name>, uniquified if taken;
// the constant's level follows its sort's level. Non-existential input is
// returned unchanged.
SkolemResult skolemize_outer_existentials(Signature& sig, const FormulaPtr& f,
                                          const std::string& prefix);

// Conjunction of all |reps|^|vars| ground instances of a forall-prefix whose
// variables all have sort id_sort. Enumeration order is lexicographic in
// (binder, representative) order, so output is deterministic.
FormulaPtr ground_instantiate(const Signature& sig, const FormulaPtr& f,
                              const std::vector<TermPtr>& reps, SortId id_sort);

// Instantiates a universal prefix over the EDT domains of the binder sorts
// (executability-mode grounding of Eq.-(1)-style formulas). Throws if some
// binder sort is not enumerated.
FormulaPtr ground_over_edt(const Signature& sig, const FormulaPtr& f);

} // namespace soverify
