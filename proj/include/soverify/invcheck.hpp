// Parameterized invariant verification: the three INV-rule obligations,
// the preservation transformation, and their dispatch through the
// forall-Id decision procedure under the equivalence-relation substrate.

#pragma once

#include "soverify/symexec.hpp"

namespace soverify {

enum class InvKind : uint8_t { I1, I2, I3 };

struct InvObligation {
  InvKind kind = InvKind::I1;
  std::string transition;  // I3 only
  ObligationQuery query;   // forall-Id shaped formula + context
};

// Initiation and strengthening: iota and not psi, psi and not phi, with the
// negated side's Id variables Skolemized and the positive side kept
// universal. psi/phi must be forall-Id formulas with quantifier-free
// matrices (or quantifier-free outright).
std::pair<InvObligation, InvObligation> build_I1_I2(const TwoLevelSystem& sys,
                                                    const FormulaPtr& candidate,
                                                    const FormulaPtr& target);

// Property-2 negation of {psi} tau {psi}: the pre-state psi stays
// universal, the violated post instance and the transition witnesses are
// Skolemized, and the primed symbols are beta-reduced away. The result has
// the shape (forall part) and (quantifier-free part).
InvObligation negate_preservation(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                                  const Transition& tau);

struct InvObligationReport {
  std::string kind;        // "I1" | "I2" | "I3"
  std::string transition;  // I3 only
  std::string verdict;     // "holds" | "counterexample-to-induction" | "unsupported"
  std::optional<FiniteStructure> counterexample;
  FormulaPtr formula;           // the dispatched obligation (extended signature)
  std::string obligation_text;  // DSL rendering, for solve-replay
  std::vector<std::pair<std::string, std::string>> fresh_consts;  // name -> sort
  std::string reason, reason_code;
};

struct InvariantReport {
  std::string task;
  std::string system;
  std::vector<Diagnostic> diagnostics;
  std::vector<InvObligationReport> obligations;
  // "established" | "not-established" | "unsupported"; counterexamples are
  // to induction, not reachability, and the report says so
  std::string verdict;
};

InvariantReport check_inductive(const TwoLevelSystem& sys, const InvariantTask& task,
                                int jobs = 1, TraceSink trace = nullptr);

} // namespace soverify
