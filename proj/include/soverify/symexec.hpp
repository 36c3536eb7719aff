// Executability checking: enabledness and Hoare-triple validity of scenario
// steps, reduced to ground combined-theory (un)satisfiability.
//
// Obligations that mention a post state also extend the policy rule set:
// the policy theory constrains every state, so each rule whose body reads a
// state table gets a copy with those atoms primed and beta-reduced through
// the transition's updates (split back into Horn shape). Rules headed by a
// state predicate become explicit constraints on the updated tables.

#pragma once

#include <optional>
#include <string>

#include "soverify/combine.hpp"
#include "soverify/wellformed.hpp"

namespace soverify {

struct ObligationQuery {
  TheoryContext ctx;   // Skolem-extended signature, extended rule set
  FormulaPtr formula;  // the reduced obligation
  std::vector<std::pair<std::string, FunId>> witnesses;  // transition var -> constant
  std::optional<Verdict> blocked;  // set when the reduction is Unsupported
};

// Skolemizes the transition's witnesses and instantiates its updates.
struct InstantiatedTransition {
  FormulaPtr guard;  // ground
  std::map<FunId, TermPtr> wf_updates;
  std::map<PredId, PredicateUpdate> pm_updates;
  std::vector<std::pair<std::string, FunId>> witnesses;
};

InstantiatedTransition instantiate_transition(Signature& sig, const Transition& tau,
                                              const std::string& prefix);

// Adds the post-state copies of the policy rules for the given instantiated
// updates: rules reading state tables get beta-reduced copies; rules heading
// a state table yield constraint formulas appended to `constraints` (ground
// in executability mode, forall-Id parts in invariant mode). Returns an
// Unsupported verdict when a copy falls outside Horn shape.
std::optional<Verdict> add_post_state_rules(const Signature& sig, TaskMode mode,
                                            const InstantiatedTransition& inst,
                                            std::vector<Rule>& rules,
                                            std::vector<FormulaPtr>& constraints);

// {phi} tau {psi} reduced to a ground formula: phi and G and not(psi-bar),
// with psi's state symbols primed and beta-reduced through the updates.
ObligationQuery reduce_triple(const TwoLevelSystem& sys, const FormulaPtr& pre,
                              const Transition& tau, const FormulaPtr& post,
                              const std::string& label);

enum class TripleStatus : uint8_t { Valid, Invalid, Unsupported };

struct TripleResult {
  TripleStatus status = TripleStatus::Unsupported;
  std::optional<FiniteStructure> countermodel;           // Invalid
  std::vector<std::pair<std::string, std::string>> witness_values;  // Invalid
  FormulaPtr reduced;          // the obligation formula (extended signature)
  std::string obligation_text; // DSL rendering, for solve-replay
  std::vector<std::pair<std::string, std::string>> fresh_consts;  // name -> sort
  std::string reason;   // Unsupported
  std::string reason_code;
};

TripleResult check_triple(const TwoLevelSystem& sys, const FormulaPtr& pre,
                          const Transition& tau, const FormulaPtr& post,
                          const std::string& label, TraceSink trace = nullptr);

struct EnabledResult {
  bool enabled = false;
  bool unsupported = false;
  std::string reason, reason_code;
  std::vector<std::pair<std::string, std::string>> witness;  // var -> element
  FormulaPtr query;
};

EnabledResult check_enabled(const TwoLevelSystem& sys, const FormulaPtr& pre,
                            const Transition& tau, const std::string& label,
                            TraceSink trace = nullptr);

struct StepReport {
  int index = 0;
  std::string transition;
  EnabledResult enabled;
  TripleResult triple;
};

struct ScenarioReport {
  std::string scenario;
  std::string system;
  std::vector<Diagnostic> diagnostics;  // well-formedness findings
  std::vector<StepReport> steps;
  std::string verdict;  // "valid" | "invalid" | "unsupported"
};

ScenarioReport run_scenario(const TwoLevelSystem& sys, const Scenario& sc,
                            TraceSink trace = nullptr);

} // namespace soverify
