// The verifier's model of a two-level service-oriented application:
// partitioned signature, substrate / WF / PM theories, state symbols,
// initial formula, guarded-assignment transitions, plus the verification
// tasks (scenarios and invariant candidates) that reference it.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "soverify/logic.hpp"

namespace soverify {

// One PM update or initial definition: forall z. p(z) <-> def(i, p, z).
// The definition is quantifier-free and mentions no primed symbols.
struct PredicateUpdate {
  PredId pred = -1;
  std::vector<std::pair<std::string, SortId>> params;
  FormulaPtr def;
};

struct InitialFormula {
  std::vector<std::pair<std::string, SortId>> id_vars;
  FormulaPtr wf_part;                    // quantifier-free over (id_vars, state vars)
  std::vector<PredicateUpdate> pm_defs;  // exactly one per state predicate
};

struct Transition {
  std::string name;
  std::vector<std::pair<std::string, SortId>> id_vars;   // Id-sorted witnesses
  std::vector<std::pair<std::string, SortId>> data_vars; // other witnesses
  FormulaPtr guard;                                      // quantifier-free
  std::vector<std::pair<FunId, TermPtr>> wf_updates;     // one per state variable
  std::vector<PredicateUpdate> pm_updates;               // one per state predicate
};

enum class PmMode { Datalog, HornDepthBounded };

// Horn rule head <- body. Variables are implicitly universally quantified;
// body atoms are predicate atoms (equality atoms appear only in internally
// derived post-state rule copies).
struct Rule {
  std::string name;
  FormulaPtr head;               // Atom over an unprimed predicate
  std::vector<FormulaPtr> body;  // Atom or Eq nodes
};

struct SubstrateSpec {
  bool equivalence = false;  // equivalence-relation substrate over Id
  SortId id_sort = kNoSort;
  std::vector<SortId> edt_sorts;  // enumerated substrate sorts (Id, Role, ...)
};

struct WfTheory {
  // Universal sentences; ground sentences are the 0-variable case.
  std::vector<std::pair<std::string, FormulaPtr>> axioms;
  std::vector<SortId> edt_sorts;  // WF-level enumerated sorts
};

struct PmTheory {
  PmMode mode = PmMode::Datalog;
  int horn_depth = 6;
  std::vector<Rule> rules;
};

struct TwoLevelSystem {
  std::string name;
  Signature sig;
  SubstrateSpec substrate;
  WfTheory wf;
  PmTheory pm;
  std::vector<FunId> state_vars;
  std::vector<PredId> state_preds;
  InitialFormula init;
  std::vector<Transition> transitions;
  std::map<std::string, FormulaPtr> named_formulas;  // defformula blocks

  const Transition* find_transition(const std::string& name) const;
  // Every enumerated sort of the system (substrate + WF level).
  std::vector<SortId> all_edt_sorts() const;
};

// Alternating phi_0, tau_1, phi_1, ..., tau_n, phi_n.
struct Scenario {
  std::string name;
  std::string system;
  std::vector<FormulaPtr> states;        // n+1 quantifier-free state formulas
  std::vector<std::string> transitions;  // n transition names
};

struct InvariantTask {
  std::string name;
  std::string system;
  FormulaPtr target;     // the property phi
  FormulaPtr candidate;  // the auxiliary psi (defaults to target)
};

struct SpecFile {
  std::vector<TwoLevelSystem> systems;  // exactly one per file
  std::vector<Scenario> scenarios;
  std::vector<InvariantTask> invariants;

  const TwoLevelSystem& system_named(const std::string& name) const;
};

} // namespace soverify
