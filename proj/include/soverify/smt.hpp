// Ground satisfiability modulo equality and enumerated domains: a lazy
// DPLL enumerator over the query's atoms plus congruence closure, with
// per-term exhaustiveness clauses encoding the EDT axioms finitely.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "soverify/model.hpp"

namespace soverify {

enum class Status : uint8_t { Sat, Unsat, Unsupported };

struct Verdict {
  Status status = Status::Unsupported;
  std::optional<FiniteStructure> model;   // Sat: evaluates every input literal true
  std::vector<FormulaPtr> core;           // Unsat: jointly unsatisfiable input literals
  std::string reason;                     // Unsupported: human-readable cause
  std::string reason_code;                // Unsupported: stable machine code

  static Verdict sat(FiniteStructure m) {
    Verdict v;
    v.status = Status::Sat;
    v.model = std::move(m);
    return v;
  }
  static Verdict unsat(std::vector<FormulaPtr> core = {}) {
    Verdict v;
    v.status = Status::Unsat;
    v.core = std::move(core);
    return v;
  }
  static Verdict unsupported(std::string code, std::string why) {
    Verdict v;
    v.status = Status::Unsupported;
    v.reason_code = std::move(code);
    v.reason = std::move(why);
    return v;
  }
};

// Stable atom <-> index bijection for the life of one solve.
class AtomTable {
public:
  // equality atoms are stored in a canonical orientation
  int intern(const FormulaPtr& atom);
  std::optional<int> find(const FormulaPtr& atom) const;
  const FormulaPtr& at(int i) const { return atoms_.at(static_cast<size_t>(i)); }
  int size() const { return static_cast<int>(atoms_.size()); }

private:
  std::vector<FormulaPtr> atoms_;
  std::map<size_t, std::vector<int>> by_hash_;
};

// DIMACS-style literals: +(v+1) / -(v+1).
using Lit = int;
using Clause = std::vector<Lit>;

inline Lit pos(int var) { return var + 1; }
inline Lit neg(int var) { return -(var + 1); }
inline int var_of(Lit l) { return (l > 0 ? l : -l) - 1; }
inline bool sign_of(Lit l) { return l > 0; }

// Clausifies formulas over an AtomTable; non-atomic subformulas get fresh
// auxiliary variables (plain Tseitin). Atoms may keep being interned while
// clauses are added; finalize() renumbers the aux variables after the last
// atom index and must be called exactly once, before reading the clauses.
class CnfBuilder {
public:
  explicit CnfBuilder(AtomTable& atoms) : atoms_(atoms) {}

  void assert_formula(const FormulaPtr& f);
  void add_clause(Clause c) { clauses_.push_back(std::move(c)); }

  // Renumbers aux variables to [atoms, atoms+aux) and returns the total
  // variable count.
  int finalize();

  const std::vector<Clause>& clauses() const { return clauses_; }
  AtomTable& atoms() { return atoms_; }

private:
  Lit lit_for(const FormulaPtr& f);

  static constexpr int kAuxBase = 1 << 28;

  AtomTable& atoms_;
  std::vector<Clause> clauses_;
  int num_aux_ = 0;
  bool finalized_ = false;
};

// Enumerates total satisfying assignments in a fixed variable order with
// chronological backtracking. Clauses learned between calls permanently
// prune the remaining space; enumeration is deterministic. Propagation is
// queue-driven over per-variable occurrence lists.
class BoolEnumerator {
public:
  // decision_order, when given, is a permutation of the variables fixing
  // the order in which undecided variables are picked (still deterministic)
  BoolEnumerator(int num_vars, std::vector<Clause> clauses,
                 std::vector<int> decision_order = {});

  std::optional<std::vector<bool>> next();
  void learn(Clause c);
  size_t num_learned() const { return learned_; }

private:
  struct Entry {
    int var;
    bool value;
    bool decision;
    bool flipped;  // decision already tried both phases
  };

  bool propagate();
  bool advance();  // flip the deepest unflipped decision; false when exhausted
  bool clause_satisfiable(size_t ci) const;
  void attach(size_t ci);

  int num_vars_;
  std::vector<Clause> clauses_;
  std::vector<int> order_;                   // decision order over variables
  std::vector<size_t> pos_in_order_;         // variable -> position in order_
  size_t order_hint_ = 0;                    // first position that may be undecided
  std::vector<std::vector<size_t>> occurs_;  // var -> clauses containing it
  std::vector<int8_t> assign_;  // -1 unassigned, 0 false, 1 true
  std::vector<Entry> trail_;
  size_t queue_head_ = 0;  // propagation frontier into trail_
  bool needs_full_scan_ = true;  // a learned clause may be violated anywhere
  bool started_ = false;
  bool dead_ = false;
  size_t learned_ = 0;
};

// Congruence closure over ground terms, with predicates handled as
// boolean-valued applications. Detects equality/congruence conflicts and
// merges of distinct EDT constants. A proof forest records the reason for
// every union, so conflicts explain themselves as small input-literal cores.
class CongruenceSolver {
public:
  explicit CongruenceSolver(const Signature& sig) : sig_(&sig) {}

  // Literals must be ground Atom/Eq nodes or their negations.
  // Returns true when consistent.
  bool assert_literals(const std::vector<FormulaPtr>& literals);

  bool consistent() const { return consistent_; }

  // Indices into the asserted literal vector that jointly caused the
  // conflict; empty when consistent.
  const std::vector<int>& conflict_literals() const { return conflict_; }

  // Representative helpers (valid after assert_literals).
  bool same_class(const TermPtr& a, const TermPtr& b);

  // Canonical representative term of t's congruence class: arguments are
  // normalized bottom-up and each class maps to its minimal member (by
  // depth, then label). Equal classes yield structurally equal terms.
  TermPtr normalize_term(const TermPtr& t);

  // Quotient structure over the asserted terms: domains are term classes
  // (EDT-sorted classes are named by their EDT constant when one is merged
  // in), functions are populated from the term graph, predicates from the
  // positive literals.
  FiniteStructure build_model() const;

private:
  struct Node {
    bool is_pred = false;
    int sym = -1;  // FunId or PredId
    bool primed = false;
    std::vector<int> args;
    SortId sort = kNoSort;  // kNoSort for predicate nodes
    std::string label;      // anchors only; term labels print on demand
    FunId edt_constant = -1;
    TermPtr term;           // original term (non-predicate nodes)
  };

  // proof-forest edge labels: an input literal or a congruence of two
  // applications whose arguments were already equal
  struct Reason {
    int literal = -1;   // index into the asserted literals, or -1
    int app_a = -1, app_b = -1;  // congruent parent applications
  };

  std::vector<int> class_key(int node);
  int add_node(Node n);
  int intern_term(const TermPtr& t);
  int intern_atom(const FormulaPtr& a);
  int find(int x);
  bool merge(int a, int b, Reason why);
  void proof_link(int a, int b, const Reason& why);
  void explain(int a, int b, std::vector<int>& out);
  void set_conflict(std::vector<int> lits);

  const Signature* sig_;
  std::vector<Node> nodes_;
  std::vector<int> uf_;
  std::vector<int> rank_;
  std::vector<std::vector<int>> uses_;  // class -> parent nodes
  std::vector<std::pair<std::pair<int, int>, int>> diseqs_;  // (nodes, literal)
  std::map<std::vector<int>, int> node_index_;  // exact structure -> node
  std::map<std::vector<int>, int> sig_map_;     // (symbol, arg classes) -> node
  std::vector<int> edt_member_;   // class rep -> node of its EDT constant, -1
  std::vector<int> proof_parent_; // proof forest, -1 at roots
  std::vector<Reason> proof_reason_;
  std::vector<int> conflict_;
  int true_node_ = -1;
  int false_node_ = -1;
  bool consistent_ = true;
};

// Checks a ground literal conjunction for satisfiability modulo equality,
// congruence and EDT domain constraints. The cheap entry point used by the
// theory engines; cores are extracted by the callers.
bool ground_literals_consistent(const Signature& sig, const std::vector<FormulaPtr>& literals);

// Decides a ground formula modulo equality + EDT domains. Non-ground input
// throws SpecError (callers instantiate or Skolemize first). When
// `assumptions` is given, the formula is solved under those extra unit
// literals and an Unsat verdict carries a core drawn from them.
Verdict solve_ground(const Signature& sig, const FormulaPtr& f);
Verdict solve_ground_assuming(const Signature& sig, const FormulaPtr& f,
                              const std::vector<FormulaPtr>& assumptions,
                              const std::vector<TermPtr>* edt_scope = nullptr);

// Incremental front end over the same machinery: the formula, the EDT
// scope and the assumption atom universe are fixed at construction, and
// each solve() decides one signing of the atoms. Theory lemmas learned in
// one call carry over to later calls (they are assumption-independent).
class GroundSolver {
public:
  GroundSolver(const Signature& sig, const FormulaPtr& f,
               const std::vector<FormulaPtr>& assumption_atoms,
               const std::vector<TermPtr>* edt_scope = nullptr);

  // literals must sign atoms from the registered universe
  Verdict solve(const std::vector<FormulaPtr>& literals);

private:
  Status run(const std::vector<std::pair<int, bool>>& assume, FiniteStructure* out_model);

  const Signature& sig_;
  AtomTable atoms_;
  std::vector<Clause> base_;
  std::vector<Clause> theory_lemmas_;
  std::vector<FormulaPtr> neg_cache_;
  std::vector<int> order_;
  int num_vars_ = 0;
};

} // namespace soverify
