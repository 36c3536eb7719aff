// The two non-EUF theory solvers behind the combination loop:
//   - universal-axiom WF theories, decided by finite instantiation over the
//     query's subterms followed by a ground solve;
//   - Horn/Datalog PM theories, decided by bottom-up saturation with
//     negative literals treated as integrity constraints.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soverify/smt.hpp"
#include "soverify/system.hpp"

namespace soverify {

// ---- WF side ----

struct InstantiationResult {
  std::vector<FormulaPtr> instances;  // ground sentences
  bool budget_exceeded = false;
  size_t budget = 0;
};

// Grounds every axiom with every sort-correct tuple drawn from the query's
// subterms plus the EDT constants of the binder sorts.
InstantiationResult instantiate_universal_axioms(
    const Signature& sig, const std::vector<std::pair<std::string, FormulaPtr>>& axioms,
    const std::vector<TermPtr>& query_terms, size_t budget = 200000);

// Satisfiability of ground literals modulo the WF universal axioms and the
// EDT domains. Unsat cores are subsets of the input literals.
Verdict wf_theory_sat(const Signature& sig,
                      const std::vector<std::pair<std::string, FormulaPtr>>& axioms,
                      const std::vector<FormulaPtr>& literals);

// Incremental variant for callers that decide many signings of one atom
// set (the combination loop): axioms are instantiated once against the
// whole universe and lemmas persist across calls.
class WfSolver {
public:
  WfSolver(const Signature& sig,
           const std::vector<std::pair<std::string, FormulaPtr>>& axioms,
           const std::vector<FormulaPtr>& atom_universe);

  bool unsupported() const { return unsupported_.has_value(); }
  const Verdict& unsupported_verdict() const { return *unsupported_; }

  Verdict solve(const std::vector<FormulaPtr>& literals);

private:
  std::optional<Verdict> unsupported_;
  std::optional<GroundSolver> solver_;
};

// ---- PM side ----

struct Derivation {
  std::string rule;        // empty for base facts
  std::vector<int> premises;  // indices into FactBase::facts
};

// Derived atoms with replayable derivation records. Facts are stored with
// canonically renamed variables; ground facts are the special case.
struct FactBase {
  std::vector<FormulaPtr> facts;
  std::vector<Derivation> derivations;

  std::optional<int> find_fact(const FormulaPtr& atom) const;
  bool contains_instance(const FormulaPtr& ground_atom, const Signature& sig) const;
  // index of a fact subsuming the ground atom, if any
  std::optional<int> subsuming_fact(const FormulaPtr& ground_atom, const Signature& sig) const;
};

// Least fixpoint of function-free rules over the given constant universe.
// Head variables not bound by the body range over the universe of their
// sort. Rules with function symbols must go through horn_derive instead.
FactBase datalog_saturate(const Signature& sig, const std::vector<Rule>& rules,
                          const std::vector<FormulaPtr>& base_facts,
                          const std::map<SortId, std::vector<TermPtr>>& universe);

struct HornResult {
  bool derivable = false;
  FactBase base;           // everything derived within the bound
  std::optional<int> goal_fact;
};

// Bottom-up saturation with unification, restricted to facts whose terms
// stay within depth k. "Not derivable" is always relative to the bound.
HornResult horn_derive(const Signature& sig, const std::vector<Rule>& rules,
                       const std::vector<FormulaPtr>& base_facts, const FormulaPtr& goal,
                       int depth_bound);

// Saturates rules without a goal; used by pm_theory_sat.
FactBase horn_saturate(const Signature& sig, const std::vector<Rule>& rules,
                       const std::vector<FormulaPtr>& base_facts, int depth_bound);

// Renders the derivation of one fact as a tree (rule + premises per node).
std::string explain_derivation(const Signature& sig, const FactBase& fb, int fact);

// Replays one derivation record: re-evaluates its rule on its premises and
// checks the recorded conclusion is produced. Used by tests and debug runs.
bool replay_derivation(const Signature& sig, const std::vector<Rule>& rules,
                       const FactBase& fb, int fact);

struct PmQueryOptions {
  PmMode mode = PmMode::Datalog;
  int horn_depth = 6;
  // constant universe per sort for datalog head enumeration; filled by the
  // caller from the signature and the query
  std::map<SortId, std::vector<TermPtr>> universe;
};

// Satisfiability of ground literals modulo the PM rules (plus the EDT part
// of the substrate): Unsat iff the equalities are inconsistent or the
// positive facts derive an atom asserted negative. Cores are subsets of the
// input literals.
Verdict pm_theory_sat(const Signature& sig, const std::vector<Rule>& rules,
                      const std::vector<FormulaPtr>& literals, const PmQueryOptions& opts);

// term/atom depth: constants and variables have depth 1
int term_depth(const TermPtr& t);
int atom_depth(const FormulaPtr& atom);

} // namespace soverify
