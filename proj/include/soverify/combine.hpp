// The combined-theory satisfiability procedure: purification into WF- and
// PM-pure parts over fresh shared constants, interface-equality atoms for
// the substrate arrangement (against the EDT domains, or pairwise for the
// equivalence-relation substrate), and the lazy combination loop with
// conflict-clause learning.

#pragma once

#include <functional>

#include "soverify/theories.hpp"

namespace soverify {

enum class SubstrateMode : uint8_t { Edt, Equiv };

// Everything an obligation needs to decide satisfiability: the (possibly
// Skolem-extended) signature and the two component theories. Owned by value
// so concurrent obligations stay independent.
struct TheoryContext {
  Signature sig;
  std::vector<std::pair<std::string, FormulaPtr>> wf_axioms;
  std::vector<Rule> pm_rules;
  PmMode pm_mode = PmMode::Datalog;
  int horn_depth = 6;
  SubstrateMode mode = SubstrateMode::Edt;
  SortId id_sort = kNoSort;

  static TheoryContext for_system(const TwoLevelSystem& sys, SubstrateMode mode);
};

enum class AtomHome : uint8_t { WF, PM, Both };

struct PurifiedQuery {
  FormulaPtr formula;            // pure-atom skeleton with definitions conjoined
  std::vector<TermPtr> shared;   // the constants a-bar, first-occurrence order
  std::vector<std::pair<std::string, TermPtr>> origin;  // purification name -> subterm
};

// Names alien subterms with fresh substrate-level constants so that every
// atom is WF-pure or PM-pure; definitions are routed to the subterm's home
// theory. Mutates sig by appending the fresh constants.
PurifiedQuery purify(Signature& sig, const FormulaPtr& f);

// Home of a pure atom; throws on a mixed atom (purification failed).
AtomHome atom_home(const Signature& sig, const FormulaPtr& atom);

struct TraceEvent {
  int iteration = 0;
  std::vector<std::string> assignment;  // true literals over real atoms
  Status wf = Status::Unsupported;
  Status pm = Status::Unsupported;
  std::vector<std::string> learned;
};

using TraceSink = std::function<void(const TraceEvent&)>;

// The decision procedure for ground formulas. Callers instantiate and
// Skolemize first; non-ground input throws.
Verdict tsoa_sat(const TheoryContext& ctx, const FormulaPtr& f, TraceSink trace = nullptr);

// The forall-Id extension under the equivalence-substrate regime: accepts a
// conjunction of quantifier-free parts and forall-Id parts, instantiates the
// universals over the representative constants (the Id constants occurring
// in the formula, or one fresh constant), and decides the ground result.
Verdict tsoa_sat_universal(const TheoryContext& ctx, const FormulaPtr& f,
                           TraceSink trace = nullptr);

// Fragment check used by tsoa_sat_universal and the invariant pipeline:
// nullopt when supported, otherwise an Unsupported verdict carrying the
// reason code (EXISTENTIAL_QUANTIFIER, NON_ID_UNIVERSAL, UNSUPPORTED_SHAPE).
std::optional<Verdict> check_forall_id_fragment(const Signature& sig, const FormulaPtr& f,
                                                SortId id_sort);

} // namespace soverify
