#include "soverify/transform.hpp"

#include <algorithm>
#include <cassert>

namespace soverify {

TermPtr substitute(const Signature& sig, const TermPtr& t, const VarMap& m) {
  if (t->kind == Term::Kind::Var) {
    auto it = m.find(t->var_name);
    if (it == m.end()) return t;
    if (it->second->sort != t->sort)
      throw SubstitutionError("substitution sort mismatch for variable " + t->var_name);
    return it->second;
  }
  bool changed = false;
  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) {
    args.push_back(substitute(sig, a, m));
    if (args.back().get() != a.get()) changed = true;
  }
  if (!changed) return t;
  return Term::app(sig, t->fun, std::move(args), t->primed);
}

static void range_vars(const VarMap& m, std::vector<std::string>& out) {
  for (const auto& [k, v] : m) {
    (void)k;
    std::vector<TermPtr> sub;
    collect_subterms(v, sub);
    for (const auto& s : sub)
      if (s->kind == Term::Kind::Var) out.push_back(s->var_name);
  }
}

FormulaPtr substitute(const Signature& sig, const FormulaPtr& f, const VarMap& m) {
  if (m.empty()) return f;
  switch (f->kind) {
    case Conn::True:
    case Conn::False:
      return f;
    case Conn::Atom: {
      std::vector<TermPtr> args;
      for (const auto& t : f->terms) args.push_back(substitute(sig, t, m));
      return Formula::atom(sig, f->pred, std::move(args), f->primed);
    }
    case Conn::Eq:
      return Formula::eq(substitute(sig, f->terms[0], m), substitute(sig, f->terms[1], m));
    case Conn::Not:
      return Formula::negate(substitute(sig, f->kids[0], m));
    case Conn::And: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(substitute(sig, k, m));
      return Formula::conj(std::move(kids));
    }
    case Conn::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(substitute(sig, k, m));
      return Formula::disj(std::move(kids));
    }
    case Conn::Implies:
      return Formula::implies(substitute(sig, f->kids[0], m), substitute(sig, f->kids[1], m));
    case Conn::Iff:
      return Formula::iff(substitute(sig, f->kids[0], m), substitute(sig, f->kids[1], m));
    case Conn::Forall:
    case Conn::Exists: {
      VarMap inner = m;
      for (const auto& b : f->binders) inner.erase(b.first);
      if (inner.empty()) return f;
      // rename binders that would capture a variable of the range
      std::vector<std::string> range;
      range_vars(inner, range);
      auto binders = f->binders;
      FormulaPtr body = f->kids[0];
      for (auto& b : binders) {
        if (std::find(range.begin(), range.end(), b.first) == range.end()) continue;
        std::string fresh = b.first;
        int n = 0;
        auto taken = [&](const std::string& name) {
          if (std::find(range.begin(), range.end(), name) != range.end()) return true;
          for (const auto& other : binders)
            if (other.first == name) return true;
          return inner.count(name) > 0;
        };
        do {
          fresh = b.first + "#" + std::to_string(++n);
        } while (taken(fresh));
        VarMap ren{{b.first, Term::var(fresh, b.second)}};
        body = substitute(sig, body, ren);
        b.first = fresh;
      }
      body = substitute(sig, body, inner);
      return f->kind == Conn::Forall ? Formula::forall(std::move(binders), std::move(body))
                                     : Formula::exists(std::move(binders), std::move(body));
    }
  }
  throw SpecError("unreachable formula kind");
}

// ---- priming ----

static TermPtr prime_term(const Signature& sig, const TermPtr& t) {
  if (t->kind == Term::Kind::Var) return t;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(prime_term(sig, a));
  bool primed = t->primed || sig.fun(t->fun).level == Level::StateVar;
  return Term::app(sig, t->fun, std::move(args), primed);
}

FormulaPtr prime_state_symbols(const Signature& sig, const FormulaPtr& f) {
  switch (f->kind) {
    case Conn::True:
    case Conn::False:
      return f;
    case Conn::Atom: {
      std::vector<TermPtr> args;
      for (const auto& t : f->terms) args.push_back(prime_term(sig, t));
      bool primed = f->primed || sig.pred(f->pred).level == Level::StatePred;
      return Formula::atom(sig, f->pred, std::move(args), primed);
    }
    case Conn::Eq:
      return Formula::eq(prime_term(sig, f->terms[0]), prime_term(sig, f->terms[1]));
    default: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(prime_state_symbols(sig, k));
      auto g = std::make_shared<Formula>(*f);
      g->kids = std::move(kids);
      // rebuild through the constructors to refresh the hash
      switch (f->kind) {
        case Conn::Not: return Formula::negate(g->kids[0]);
        case Conn::And: return Formula::conj(g->kids);
        case Conn::Or: return Formula::disj(g->kids);
        case Conn::Implies: return Formula::implies(g->kids[0], g->kids[1]);
        case Conn::Iff: return Formula::iff(g->kids[0], g->kids[1]);
        case Conn::Forall: return Formula::forall(f->binders, g->kids[0]);
        case Conn::Exists: return Formula::exists(f->binders, g->kids[0]);
        default: break;
      }
      throw SpecError("unreachable");
    }
  }
}

// ---- beta-reduction of updates ----

static TermPtr reduce_term(const Signature& sig, const TermPtr& t,
                           const std::map<FunId, TermPtr>& wf_updates) {
  if (t->kind == Term::Kind::Var) return t;
  if (t->primed) {
    auto it = wf_updates.find(t->fun);
    if (it == wf_updates.end())
      throw SpecError("no update for primed state variable " + sig.fun(t->fun).name);
    if (contains_primed(it->second))
      throw SpecError("recursive update for state variable " + sig.fun(t->fun).name);
    return it->second;
  }
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(reduce_term(sig, a, wf_updates));
  return Term::app(sig, t->fun, std::move(args), false);
}

FormulaPtr apply_updates(const Signature& sig, const FormulaPtr& f,
                         const std::map<FunId, TermPtr>& wf_updates,
                         const std::map<PredId, PredicateUpdate>& pm_updates) {
  switch (f->kind) {
    case Conn::True:
    case Conn::False:
      return f;
    case Conn::Atom: {
      std::vector<TermPtr> args;
      for (const auto& t : f->terms) args.push_back(reduce_term(sig, t, wf_updates));
      if (!f->primed) return Formula::atom(sig, f->pred, std::move(args), false);
      auto it = pm_updates.find(f->pred);
      if (it == pm_updates.end())
        throw SpecError("no update for primed state predicate " + sig.pred(f->pred).name);
      const PredicateUpdate& upd = it->second;
      if (contains_primed(upd.def))
        throw SpecError("recursive update for state predicate " + sig.pred(f->pred).name);
      assert(upd.params.size() == args.size());
      VarMap m;
      for (size_t i = 0; i < args.size(); ++i) m[upd.params[i].first] = args[i];
      return substitute(sig, upd.def, m);
    }
    case Conn::Eq:
      return Formula::eq(reduce_term(sig, f->terms[0], wf_updates),
                         reduce_term(sig, f->terms[1], wf_updates));
    case Conn::Not:
      return Formula::negate(apply_updates(sig, f->kids[0], wf_updates, pm_updates));
    case Conn::And:
    case Conn::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(apply_updates(sig, k, wf_updates, pm_updates));
      return f->kind == Conn::And ? Formula::conj(std::move(kids))
                                  : Formula::disj(std::move(kids));
    }
    case Conn::Implies:
      return Formula::implies(apply_updates(sig, f->kids[0], wf_updates, pm_updates),
                              apply_updates(sig, f->kids[1], wf_updates, pm_updates));
    case Conn::Iff:
      return Formula::iff(apply_updates(sig, f->kids[0], wf_updates, pm_updates),
                          apply_updates(sig, f->kids[1], wf_updates, pm_updates));
    case Conn::Forall:
    case Conn::Exists: {
      // update definitions are prime-free, so primed symbols never hide
      // under a binder that shadows update parameters
      auto body = apply_updates(sig, f->kids[0], wf_updates, pm_updates);
      return f->kind == Conn::Forall ? Formula::forall(f->binders, std::move(body))
                                     : Formula::exists(f->binders, std::move(body));
    }
  }
  throw SpecError("unreachable formula kind");
}

// ---- Skolemization ----

SkolemResult skolemize_outer_existentials(Signature& sig, const FormulaPtr& f,
                                          const std::string& prefix) {
  SkolemResult res;
  res.formula = f;
  while (res.formula->kind == Conn::Exists) {
    VarMap m;
    for (const auto& [name, sort] : res.formula->binders) {
      Level level = sig.sort(sort).level;
      if (level == Level::StateVar || level == Level::StatePred) level = Level::WF;
      FunId c = sig.add_fresh_constant(prefix + name, sort, level);
      res.constants.emplace_back(name, c);
      m[name] = Term::constant(sig, c);
    }
    res.formula = substitute(sig, res.formula->kids[0], m);
  }
  return res;
}

// ---- ground instantiation ----

FormulaPtr ground_instantiate(const Signature& sig, const FormulaPtr& f,
                              const std::vector<TermPtr>& reps, SortId id_sort) {
  if (f->kind != Conn::Forall) return f;
  if (reps.empty()) throw SpecError("ground_instantiate: empty representative set");
  std::vector<std::pair<std::string, SortId>> vars = f->binders;
  FormulaPtr body = f->kids[0];
  // collapse a directly nested forall-Id prefix
  while (body->kind == Conn::Forall) {
    for (const auto& b : body->binders) vars.push_back(b);
    body = body->kids[0];
  }
  for (const auto& [name, sort] : vars) {
    if (sort != id_sort)
      throw SpecError("ground_instantiate: variable " + name + " is not Id-sorted");
  }
  size_t n = vars.size();
  std::vector<size_t> idx(n, 0);
  std::vector<FormulaPtr> conjuncts;
  while (true) {
    VarMap m;
    for (size_t i = 0; i < n; ++i) m[vars[i].first] = reps[idx[i]];
    conjuncts.push_back(substitute(sig, body, m));
    size_t k = n;
    while (k > 0) {
      if (++idx[k - 1] < reps.size()) break;
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return Formula::conj(std::move(conjuncts));
}

// Expanding a quantifier over an enumerated sort into a finite
// conjunction/disjunction is a logical equivalence under the EDT axioms,
// so this rewrite is polarity-independent.
FormulaPtr ground_over_edt(const Signature& sig, const FormulaPtr& f) {
  switch (f->kind) {
    case Conn::True:
    case Conn::False:
    case Conn::Atom:
    case Conn::Eq:
      return f;
    case Conn::Not:
      return Formula::negate(ground_over_edt(sig, f->kids[0]));
    case Conn::And:
    case Conn::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(ground_over_edt(sig, k));
      return f->kind == Conn::And ? Formula::conj(std::move(kids))
                                  : Formula::disj(std::move(kids));
    }
    case Conn::Implies:
      return Formula::implies(ground_over_edt(sig, f->kids[0]),
                              ground_over_edt(sig, f->kids[1]));
    case Conn::Iff:
      return Formula::iff(ground_over_edt(sig, f->kids[0]), ground_over_edt(sig, f->kids[1]));
    case Conn::Forall:
    case Conn::Exists: {
      std::vector<std::vector<TermPtr>> domains;
      for (const auto& [name, sort] : f->binders) {
        const auto& dom = sig.edt_domain(sort);
        if (dom.empty())
          throw SpecError("cannot ground variable " + name + ": sort " +
                          sig.sort(sort).name + " is not enumerated");
        std::vector<TermPtr> terms;
        for (FunId c : dom) terms.push_back(Term::constant(sig, c));
        domains.push_back(std::move(terms));
      }
      size_t n = f->binders.size();
      std::vector<size_t> idx(n, 0);
      std::vector<FormulaPtr> parts;
      while (true) {
        VarMap m;
        for (size_t i = 0; i < n; ++i) m[f->binders[i].first] = domains[i][idx[i]];
        parts.push_back(ground_over_edt(sig, substitute(sig, f->kids[0], m)));
        size_t k = n;
        while (k > 0) {
          if (++idx[k - 1] < domains[k - 1].size()) break;
          idx[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
      return f->kind == Conn::Forall ? Formula::conj(std::move(parts))
                                     : Formula::disj(std::move(parts));
    }
  }
  throw SpecError("unreachable formula kind");
}

} // namespace soverify
