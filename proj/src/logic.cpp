#include "soverify/logic.hpp"

#include <algorithm>
#include <unordered_set>

namespace soverify {

const char* level_name(Level lv) {
  switch (lv) {
    case Level::Substrate: return "substrate";
    case Level::WF: return "wf";
    case Level::PM: return "pm";
    case Level::StateVar: return "statevar";
    case Level::StatePred: return "statepred";
  }
  return "?";
}

static size_t hash_combine(size_t seed, size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

// ---- Signature ----

SortId Signature::add_sort(const std::string& name, Level level, bool enumerated) {
  if (has_symbol(name) || sort_by_name_.count(name))
    throw SpecError("duplicate sort name: " + name);
  SortDecl d;
  d.name = name;
  d.level = level;
  d.enumerated = enumerated;
  sorts_.push_back(std::move(d));
  SortId id = static_cast<SortId>(sorts_.size() - 1);
  sort_by_name_[name] = id;
  return id;
}

FunId Signature::add_fun(const std::string& name, std::vector<SortId> args, SortId result,
                         Level level, bool is_edt_constant) {
  if (has_symbol(name) || sort_by_name_.count(name))
    throw SpecError("duplicate symbol name: " + name);
  if (result < 0 || static_cast<size_t>(result) >= sorts_.size())
    throw SpecError("unknown result sort for function " + name);
  if (is_edt_constant && !args.empty())
    throw SpecError("EDT constant must be 0-ary: " + name);
  FunDecl d;
  d.name = name;
  d.args = std::move(args);
  d.result = result;
  d.level = level;
  d.is_edt_constant = is_edt_constant;
  funs_.push_back(std::move(d));
  FunId id = static_cast<FunId>(funs_.size() - 1);
  fun_by_name_[name] = id;
  if (is_edt_constant) sorts_[static_cast<size_t>(result)].edt_constants.push_back(id);
  return id;
}

PredId Signature::add_pred(const std::string& name, std::vector<SortId> args, Level level) {
  if (has_symbol(name) || sort_by_name_.count(name))
    throw SpecError("duplicate symbol name: " + name);
  PredDecl d;
  d.name = name;
  d.args = std::move(args);
  d.level = level;
  preds_.push_back(std::move(d));
  PredId id = static_cast<PredId>(preds_.size() - 1);
  pred_by_name_[name] = id;
  return id;
}

std::optional<SortId> Signature::find_sort(const std::string& name) const {
  auto it = sort_by_name_.find(name);
  if (it == sort_by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<FunId> Signature::find_fun(const std::string& name) const {
  auto it = fun_by_name_.find(name);
  if (it == fun_by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<PredId> Signature::find_pred(const std::string& name) const {
  auto it = pred_by_name_.find(name);
  if (it == pred_by_name_.end()) return std::nullopt;
  return it->second;
}

bool Signature::has_symbol(const std::string& name) const {
  return fun_by_name_.count(name) || pred_by_name_.count(name);
}

FunId Signature::add_fresh_constant(const std::string& base, SortId sort, Level level) {
  std::string name = base;
  int suffix = 1;
  while (has_symbol(name) || sort_by_name_.count(name)) {
    name = base + "_" + std::to_string(++suffix);
  }
  return add_fun(name, {}, sort, level, false);
}

// ---- Terms ----

TermPtr Term::var(std::string name, SortId sort) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->sort = sort;
  t->var_name = std::move(name);
  size_t h = std::hash<std::string>{}(t->var_name);
  h = hash_combine(h, static_cast<size_t>(sort) + 17);
  t->hash = hash_combine(h, 0xbeefULL);
  return t;
}

TermPtr Term::app(const Signature& sig, FunId fun, std::vector<TermPtr> args, bool primed) {
  const FunDecl& d = sig.fun(fun);
  if (args.size() != d.args.size())
    throw SpecError("arity mismatch applying " + d.name);
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i]->sort != d.args[i])
      throw SpecError("sort mismatch in argument " + std::to_string(i + 1) + " of " + d.name);
  }
  if (primed && d.level != Level::StateVar)
    throw SpecError("prime on non-state symbol " + d.name);
  auto t = std::make_shared<Term>();
  t->kind = Kind::App;
  t->sort = d.result;
  t->fun = fun;
  t->primed = primed;
  t->args = std::move(args);
  size_t h = hash_combine(0x5eedULL, static_cast<size_t>(fun) * 2 + (primed ? 1 : 0));
  for (const auto& a : t->args) h = hash_combine(h, a->hash);
  t->hash = h;
  return t;
}

bool equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind || a->sort != b->sort) return false;
  if (a->kind == Term::Kind::Var) return a->var_name == b->var_name;
  if (a->fun != b->fun || a->primed != b->primed || a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

int term_compare(const TermPtr& a, const TermPtr& b) {
  if (a->kind != b->kind) return a->kind == Term::Kind::Var ? -1 : 1;
  if (a->kind == Term::Kind::Var) {
    if (a->var_name != b->var_name) return a->var_name < b->var_name ? -1 : 1;
    if (a->sort != b->sort) return a->sort < b->sort ? -1 : 1;
    return 0;
  }
  if (a->fun != b->fun) return a->fun < b->fun ? -1 : 1;
  if (a->primed != b->primed) return a->primed ? 1 : -1;
  if (a->args.size() != b->args.size()) return a->args.size() < b->args.size() ? -1 : 1;
  for (size_t i = 0; i < a->args.size(); ++i) {
    int c = term_compare(a->args[i], b->args[i]);
    if (c != 0) return c;
  }
  return 0;
}

// ---- Formulas ----

static FormulaPtr mk(Conn kind) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  return f;
}

static size_t formula_hash(const Formula& f) {
  size_t h = hash_combine(0xf0f0ULL, static_cast<size_t>(f.kind));
  h = hash_combine(h, static_cast<size_t>(f.pred) * 2 + (f.primed ? 1 : 0));
  for (const auto& t : f.terms) h = hash_combine(h, t->hash);
  for (const auto& k : f.kids) h = hash_combine(h, k->hash);
  for (const auto& b : f.binders) {
    h = hash_combine(h, std::hash<std::string>{}(b.first));
    h = hash_combine(h, static_cast<size_t>(b.second));
  }
  return h;
}

FormulaPtr Formula::atom(const Signature& sig, PredId pred, std::vector<TermPtr> args,
                         bool primed) {
  const PredDecl& d = sig.pred(pred);
  if (args.size() != d.args.size())
    throw SpecError("arity mismatch applying predicate " + d.name);
  for (size_t i = 0; i < args.size(); ++i)
    if (args[i]->sort != d.args[i])
      throw SpecError("sort mismatch in argument " + std::to_string(i + 1) + " of predicate " + d.name);
  if (primed && d.level != Level::StatePred)
    throw SpecError("prime on non-state predicate " + d.name);
  auto f = mk(Conn::Atom);
  auto* m = const_cast<Formula*>(f.get());
  m->pred = pred;
  m->primed = primed;
  m->terms = std::move(args);
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::eq(TermPtr lhs, TermPtr rhs) {
  if (lhs->sort != rhs->sort) throw SpecError("equality between different sorts");
  auto f = mk(Conn::Eq);
  auto* m = const_cast<Formula*>(f.get());
  m->terms = {std::move(lhs), std::move(rhs)};
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::tru() {
  auto f = mk(Conn::True);
  const_cast<Formula*>(f.get())->hash = formula_hash(*f);
  return f;
}

FormulaPtr Formula::fls() {
  auto f = mk(Conn::False);
  const_cast<Formula*>(f.get())->hash = formula_hash(*f);
  return f;
}

FormulaPtr Formula::negate(FormulaPtr g) {
  if (g->kind == Conn::True) return fls();
  if (g->kind == Conn::False) return tru();
  if (g->kind == Conn::Not) return g->kids[0];
  auto f = mk(Conn::Not);
  auto* m = const_cast<Formula*>(f.get());
  m->kids = {std::move(g)};
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::conj(std::vector<FormulaPtr> kids) {
  std::vector<FormulaPtr> flat;
  for (auto& k : kids) {
    if (k->kind == Conn::True) continue;
    if (k->kind == Conn::False) return fls();
    if (k->kind == Conn::And) {
      for (const auto& kk : k->kids) flat.push_back(kk);
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return tru();
  if (flat.size() == 1) return flat[0];
  auto f = mk(Conn::And);
  auto* m = const_cast<Formula*>(f.get());
  m->kids = std::move(flat);
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::disj(std::vector<FormulaPtr> kids) {
  std::vector<FormulaPtr> flat;
  for (auto& k : kids) {
    if (k->kind == Conn::False) continue;
    if (k->kind == Conn::True) return tru();
    if (k->kind == Conn::Or) {
      for (const auto& kk : k->kids) flat.push_back(kk);
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return fls();
  if (flat.size() == 1) return flat[0];
  auto f = mk(Conn::Or);
  auto* m = const_cast<Formula*>(f.get());
  m->kids = std::move(flat);
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::implies(FormulaPtr a, FormulaPtr b) {
  auto f = mk(Conn::Implies);
  auto* m = const_cast<Formula*>(f.get());
  m->kids = {std::move(a), std::move(b)};
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::iff(FormulaPtr a, FormulaPtr b) {
  auto f = mk(Conn::Iff);
  auto* m = const_cast<Formula*>(f.get());
  m->kids = {std::move(a), std::move(b)};
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::forall(std::vector<std::pair<std::string, SortId>> binders, FormulaPtr body) {
  if (binders.empty()) return body;
  auto f = mk(Conn::Forall);
  auto* m = const_cast<Formula*>(f.get());
  m->binders = std::move(binders);
  m->kids = {std::move(body)};
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::exists(std::vector<std::pair<std::string, SortId>> binders, FormulaPtr body) {
  if (binders.empty()) return body;
  auto f = mk(Conn::Exists);
  auto* m = const_cast<Formula*>(f.get());
  m->binders = std::move(binders);
  m->kids = {std::move(body)};
  m->hash = formula_hash(*m);
  return f;
}

FormulaPtr Formula::ite(FormulaPtr c, FormulaPtr t, FormulaPtr e) {
  // absorption rewrites keep boolean-constant branches literal-free, which
  // matters downstream when updates are split back into Horn shape
  if (t->kind == Conn::True) return disj({std::move(c), std::move(e)});
  if (t->kind == Conn::False) return conj({negate(c), std::move(e)});
  if (e->kind == Conn::False) return conj({std::move(c), std::move(t)});
  if (e->kind == Conn::True) return disj({negate(c), std::move(t)});
  return disj({conj({c, std::move(t)}), conj({negate(c), std::move(e)})});
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind) return false;
  if (a->pred != b->pred || a->primed != b->primed) return false;
  if (a->terms.size() != b->terms.size() || a->kids.size() != b->kids.size() ||
      a->binders != b->binders)
    return false;
  for (size_t i = 0; i < a->terms.size(); ++i)
    if (!equal(a->terms[i], b->terms[i])) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!equal(a->kids[i], b->kids[i])) return false;
  return true;
}

// ---- Syntactic queries ----

bool is_ground(const TermPtr& t) {
  if (t->kind == Term::Kind::Var) return false;
  for (const auto& a : t->args)
    if (!is_ground(a)) return false;
  return true;
}

bool is_ground(const FormulaPtr& f) {
  if (f->kind == Conn::Forall || f->kind == Conn::Exists) return false;
  for (const auto& t : f->terms)
    if (!is_ground(t)) return false;
  for (const auto& k : f->kids)
    if (!is_ground(k)) return false;
  return true;
}

bool is_quantifier_free(const FormulaPtr& f) {
  if (f->kind == Conn::Forall || f->kind == Conn::Exists) return false;
  for (const auto& k : f->kids)
    if (!is_quantifier_free(k)) return false;
  return true;
}

bool contains_primed(const TermPtr& t) {
  if (t->kind == Term::Kind::App) {
    if (t->primed) return true;
    for (const auto& a : t->args)
      if (contains_primed(a)) return true;
  }
  return false;
}

bool contains_primed(const FormulaPtr& f) {
  if (f->primed) return true;
  for (const auto& t : f->terms)
    if (contains_primed(t)) return true;
  for (const auto& k : f->kids)
    if (contains_primed(k)) return true;
  return false;
}

static void free_vars_term(const TermPtr& t, const std::vector<std::string>& bound,
                           std::vector<std::pair<std::string, SortId>>& out) {
  if (t->kind == Term::Kind::Var) {
    if (std::find(bound.begin(), bound.end(), t->var_name) != bound.end()) return;
    for (const auto& v : out)
      if (v.first == t->var_name) return;
    out.emplace_back(t->var_name, t->sort);
    return;
  }
  for (const auto& a : t->args) free_vars_term(a, bound, out);
}

static void free_vars_rec(const FormulaPtr& f, std::vector<std::string>& bound,
                          std::vector<std::pair<std::string, SortId>>& out) {
  for (const auto& t : f->terms) free_vars_term(t, bound, out);
  if (f->kind == Conn::Forall || f->kind == Conn::Exists) {
    size_t n = bound.size();
    for (const auto& b : f->binders) bound.push_back(b.first);
    free_vars_rec(f->kids[0], bound, out);
    bound.resize(n);
    return;
  }
  for (const auto& k : f->kids) free_vars_rec(k, bound, out);
}

void collect_free_vars(const FormulaPtr& f,
                       std::vector<std::pair<std::string, SortId>>& out) {
  std::vector<std::string> bound;
  free_vars_rec(f, bound, out);
}

void collect_subterms(const TermPtr& t, std::vector<TermPtr>& out) {
  for (const auto& s : out)
    if (equal(s, t)) {
      // already collected, but arguments were collected with it
      return;
    }
  if (t->kind == Term::Kind::App)
    for (const auto& a : t->args) collect_subterms(a, out);
  out.push_back(t);
}

static void subterms_rec(const FormulaPtr& f, std::vector<TermPtr>& out) {
  for (const auto& t : f->terms) collect_subterms(t, out);
  for (const auto& k : f->kids) subterms_rec(k, out);
}

std::vector<TermPtr> collect_subterms(const FormulaPtr& f) {
  std::vector<TermPtr> out;
  subterms_rec(f, out);
  return out;
}

static void atoms_rec(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == Conn::Atom || f->kind == Conn::Eq) {
    for (const auto& a : out)
      if (equal(a, f)) return;
    out.push_back(f);
    return;
  }
  for (const auto& k : f->kids) atoms_rec(k, out);
}

std::vector<FormulaPtr> collect_atoms(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  atoms_rec(f, out);
  return out;
}

std::vector<TermPtr> collect_constants_of_sort(const FormulaPtr& f, SortId sort) {
  std::vector<TermPtr> out;
  for (const auto& t : collect_subterms(f)) {
    if (t->kind == Term::Kind::App && t->args.empty() && t->sort == sort && !t->primed)
      out.push_back(t);
  }
  return out;
}

} // namespace soverify
