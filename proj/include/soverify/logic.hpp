// Many-sorted first-order terms and formulas with a partitioned signature
// (substrate / workflow / policy / state symbols). Terms and formulas are
// immutable trees with precomputed structural hashes; values are shared
// freely across threads.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace soverify {

using SortId = int32_t;
using FunId = int32_t;
using PredId = int32_t;

constexpr SortId kNoSort = -1;

// Partition tag: every signature symbol belongs to exactly one level.
enum class Level : uint8_t { Substrate, WF, PM, StateVar, StatePred };

const char* level_name(Level lv);

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SortDecl {
  std::string name;
  Level level = Level::WF;
  bool enumerated = false;         // has a closed constant list (EDT)
  std::vector<FunId> edt_constants; // filled once the constants are declared
};

struct FunDecl {
  std::string name;
  std::vector<SortId> args;
  SortId result = kNoSort;
  Level level = Level::WF;
  bool is_edt_constant = false;
};

struct PredDecl {
  std::string name;
  std::vector<SortId> args;
  Level level = Level::PM;
};

// Value-semantic signature: obligations that need Skolem constants work on
// their own copy.
class Signature {
public:
  SortId add_sort(const std::string& name, Level level, bool enumerated = false);
  FunId add_fun(const std::string& name, std::vector<SortId> args, SortId result,
                Level level, bool is_edt_constant = false);
  PredId add_pred(const std::string& name, std::vector<SortId> args, Level level);

  std::optional<SortId> find_sort(const std::string& name) const;
  std::optional<FunId> find_fun(const std::string& name) const;
  std::optional<PredId> find_pred(const std::string& name) const;

  const SortDecl& sort(SortId s) const { return sorts_.at(static_cast<size_t>(s)); }
  const FunDecl& fun(FunId f) const { return funs_.at(static_cast<size_t>(f)); }
  const PredDecl& pred(PredId p) const { return preds_.at(static_cast<size_t>(p)); }

  size_t num_sorts() const { return sorts_.size(); }
  size_t num_funs() const { return funs_.size(); }
  size_t num_preds() const { return preds_.size(); }

  bool has_symbol(const std::string& name) const;

  // Adds a fresh constant, uniquifying `base` if taken.
  FunId add_fresh_constant(const std::string& base, SortId sort, Level level);

  // EDT domain of a sort, empty when the sort is not enumerated.
  const std::vector<FunId>& edt_domain(SortId s) const { return sort(s).edt_constants; }

private:
  std::vector<SortDecl> sorts_;
  std::vector<FunDecl> funs_;
  std::vector<PredDecl> preds_;
  std::map<std::string, SortId> sort_by_name_;
  std::map<std::string, FunId> fun_by_name_;
  std::map<std::string, PredId> pred_by_name_;
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind : uint8_t { Var, App };

  Kind kind;
  SortId sort = kNoSort;
  size_t hash = 0;

  // Var
  std::string var_name;

  // App; a primed application refers to the post-state copy of a state symbol.
  FunId fun = -1;
  bool primed = false;
  std::vector<TermPtr> args;

  static TermPtr var(std::string name, SortId sort);
  static TermPtr app(const Signature& sig, FunId fun, std::vector<TermPtr> args,
                     bool primed = false);
  static TermPtr constant(const Signature& sig, FunId fun, bool primed = false) {
    return app(sig, fun, {}, primed);
  }
};

bool equal(const TermPtr& a, const TermPtr& b);

// deterministic structural order, used to orient equality atoms
int term_compare(const TermPtr& a, const TermPtr& b);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class Conn : uint8_t {
  Atom, Eq, True, False, Not, And, Or, Implies, Iff, Forall, Exists
};

struct Formula {
  Conn kind;
  size_t hash = 0;

  // Atom
  PredId pred = -1;
  bool primed = false;
  std::vector<TermPtr> terms; // Atom args, or the two sides of Eq

  std::vector<FormulaPtr> kids;                      // connective children
  std::vector<std::pair<std::string, SortId>> binders; // Forall / Exists

  static FormulaPtr atom(const Signature& sig, PredId pred, std::vector<TermPtr> args,
                         bool primed = false);
  static FormulaPtr eq(TermPtr lhs, TermPtr rhs);
  static FormulaPtr tru();
  static FormulaPtr fls();
  static FormulaPtr negate(FormulaPtr f);
  static FormulaPtr conj(std::vector<FormulaPtr> kids); // flattens, drops true
  static FormulaPtr disj(std::vector<FormulaPtr> kids);
  static FormulaPtr implies(FormulaPtr a, FormulaPtr b);
  static FormulaPtr iff(FormulaPtr a, FormulaPtr b);
  static FormulaPtr forall(std::vector<std::pair<std::string, SortId>> binders, FormulaPtr body);
  static FormulaPtr exists(std::vector<std::pair<std::string, SortId>> binders, FormulaPtr body);
  // if-then-else over formulas, desugared to (c and t) or (not c and e)
  static FormulaPtr ite(FormulaPtr c, FormulaPtr t, FormulaPtr e);
};

bool equal(const FormulaPtr& a, const FormulaPtr& b);

// Structural-equality hash functors for unordered containers.
struct TermHash { size_t operator()(const TermPtr& t) const { return t->hash; } };
struct TermEq { bool operator()(const TermPtr& a, const TermPtr& b) const { return equal(a, b); } };
struct FormulaHash { size_t operator()(const FormulaPtr& f) const { return f->hash; } };
struct FormulaEq { bool operator()(const FormulaPtr& a, const FormulaPtr& b) const { return equal(a, b); } };

// ---- Syntactic queries ----

bool is_ground(const TermPtr& t);
bool is_ground(const FormulaPtr& f);
bool is_quantifier_free(const FormulaPtr& f);
bool contains_primed(const TermPtr& t);
bool contains_primed(const FormulaPtr& f);

void collect_free_vars(const FormulaPtr& f,
                       std::vector<std::pair<std::string, SortId>>& out);

// All distinct subterms, in first-occurrence order (deterministic).
std::vector<TermPtr> collect_subterms(const FormulaPtr& f);
void collect_subterms(const TermPtr& t, std::vector<TermPtr>& out);

// All distinct atoms (Atom and Eq nodes), in first-occurrence order.
std::vector<FormulaPtr> collect_atoms(const FormulaPtr& f);

// 0-ary application constants of a given sort, in first-occurrence order.
std::vector<TermPtr> collect_constants_of_sort(const FormulaPtr& f, SortId sort);

} // namespace soverify
