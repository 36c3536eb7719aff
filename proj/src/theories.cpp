#include "soverify/theories.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

#include "soverify/printer.hpp"
#include "soverify/transform.hpp"

namespace soverify {

int term_depth(const TermPtr& t) {
  if (t->kind == Term::Kind::Var || t->args.empty()) return 1;
  int d = 0;
  for (const auto& a : t->args) d = std::max(d, term_depth(a));
  return d + 1;
}

int atom_depth(const FormulaPtr& atom) {
  int d = 0;
  for (const auto& t : atom->terms) d = std::max(d, term_depth(t));
  return d;
}

// ---- axiom instantiation ----

namespace {

// ground substitutions for one axiom: trigger application subterms of the
// matrix are matched against the query's subterms, binding variables; any
// variables left over range across the instantiation domain of their sort.
// Every produced substitution draws from the query-subterms-plus-EDT
// domain, so the instance set refines the plain cartesian scheme.
struct TriggerMatcher {
  const Signature& sig;
  const std::map<SortId, std::vector<TermPtr>>& domain;

  // non-variable application subterms of the matrix, innermost first
  static void collect_patterns(const TermPtr& t, std::vector<TermPtr>& out) {
    if (t->kind == Term::Kind::Var) return;
    for (const auto& a : t->args) collect_patterns(a, out);
    if (!t->args.empty()) out.push_back(t);
  }

  static void pattern_vars(const TermPtr& t, std::vector<std::string>& out) {
    if (t->kind == Term::Kind::Var) {
      if (std::find(out.begin(), out.end(), t->var_name) == out.end())
        out.push_back(t->var_name);
      return;
    }
    for (const auto& a : t->args) pattern_vars(a, out);
  }

  static bool match(const Signature& sig, const TermPtr& pattern, const TermPtr& ground,
                    VarMap& binding) {
    if (pattern->kind == Term::Kind::Var) {
      auto it = binding.find(pattern->var_name);
      if (it != binding.end()) return equal(it->second, ground);
      if (pattern->sort != ground->sort) return false;
      binding[pattern->var_name] = ground;
      return true;
    }
    if (ground->kind != Term::Kind::App || pattern->fun != ground->fun ||
        pattern->primed != ground->primed)
      return false;
    for (size_t i = 0; i < pattern->args.size(); ++i)
      if (!match(sig, pattern->args[i], ground->args[i], binding)) return false;
    return true;
  }

  // enumerates bindings: match each trigger in turn, then enumerate the
  // leftover variables over the domain
  bool enumerate(const std::vector<TermPtr>& triggers, size_t ti,
                 const std::vector<std::pair<std::string, SortId>>& vars, VarMap binding,
                 size_t budget, std::vector<VarMap>& out) const {
    if (ti == triggers.size()) {
      std::vector<std::pair<std::string, SortId>> leftover;
      for (const auto& v : vars)
        if (!binding.count(v.first)) leftover.push_back(v);
      std::vector<const std::vector<TermPtr>*> doms;
      for (const auto& [vn, vs] : leftover) {
        (void)vn;
        auto it = domain.find(vs);
        if (it == domain.end() || it->second.empty()) return true;  // no instances
        doms.push_back(&it->second);
      }
      std::vector<size_t> idx(leftover.size(), 0);
      while (true) {
        VarMap full = binding;
        for (size_t i = 0; i < leftover.size(); ++i)
          full[leftover[i].first] = (*doms[i])[idx[i]];
        out.push_back(std::move(full));
        if (out.size() > budget) return false;
        size_t k = leftover.size();
        while (k > 0) {
          if (++idx[k - 1] < doms[k - 1]->size()) break;
          idx[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
      return true;
    }
    const TermPtr& trig = triggers[ti];
    auto it = domain.find(trig->sort);
    if (it == domain.end()) return true;
    for (const auto& cand : it->second) {
      VarMap extended = binding;
      if (!match(sig, trig, cand, extended)) continue;
      if (!enumerate(triggers, ti + 1, vars, std::move(extended), budget, out)) return false;
    }
    return true;
  }
};

void collect_atom_patterns(const FormulaPtr& f, std::vector<TermPtr>& out) {
  for (const auto& t : f->terms) TriggerMatcher::collect_patterns(t, out);
  for (const auto& k : f->kids) collect_atom_patterns(k, out);
}

} // namespace

InstantiationResult instantiate_universal_axioms(
    const Signature& sig, const std::vector<std::pair<std::string, FormulaPtr>>& axioms,
    const std::vector<TermPtr>& query_terms, size_t budget) {
  InstantiationResult res;
  res.budget = budget;
  // instantiation domain: query subterms by sort, plus the EDT constants
  std::map<SortId, std::vector<TermPtr>> domain;
  auto add_term = [&](const TermPtr& t) {
    auto& v = domain[t->sort];
    for (const auto& u : v)
      if (equal(u, t)) return;
    v.push_back(t);
  };
  for (const auto& t : query_terms) add_term(t);
  for (size_t s = 0; s < sig.num_sorts(); ++s) {
    for (FunId c : sig.sort(static_cast<SortId>(s)).edt_constants)
      add_term(Term::constant(sig, c));
  }
  TriggerMatcher matcher{sig, domain};

  for (const auto& [name, axiom] : axioms) {
    (void)name;
    std::vector<std::pair<std::string, SortId>> vars;
    FormulaPtr body = axiom;
    while (body->kind == Conn::Forall) {
      for (const auto& b : body->binders) vars.push_back(b);
      body = body->kids[0];
    }
    if (vars.empty()) {
      res.instances.push_back(body);
      continue;
    }
    // trigger selection: smallest application patterns first, keep those
    // that bind at least one still-uncovered variable
    std::vector<TermPtr> patterns;
    collect_atom_patterns(body, patterns);
    std::stable_sort(patterns.begin(), patterns.end(),
                     [](const TermPtr& a, const TermPtr& b) {
                       return term_depth(a) < term_depth(b);
                     });
    std::vector<TermPtr> triggers;
    std::vector<std::string> covered;
    for (const auto& p : patterns) {
      std::vector<std::string> pv;
      TriggerMatcher::pattern_vars(p, pv);
      bool news = false;
      for (const auto& v : pv)
        news |= std::find(covered.begin(), covered.end(), v) == covered.end();
      if (!news) continue;
      triggers.push_back(p);
      for (const auto& v : pv)
        if (std::find(covered.begin(), covered.end(), v) == covered.end())
          covered.push_back(v);
    }

    std::vector<VarMap> bindings;
    if (!matcher.enumerate(triggers, 0, vars, {}, budget - res.instances.size(), bindings)) {
      res.budget_exceeded = true;
      return res;
    }
    for (const auto& m : bindings) {
      res.instances.push_back(substitute(sig, body, m));
      if (res.instances.size() > budget) {
        res.budget_exceeded = true;
        return res;
      }
    }
  }
  return res;
}

WfSolver::WfSolver(const Signature& sig,
                   const std::vector<std::pair<std::string, FormulaPtr>>& axioms,
                   const std::vector<FormulaPtr>& atom_universe) {
  std::vector<TermPtr> terms;
  std::vector<FormulaPtr> assumption_atoms;
  for (const auto& a : atom_universe) {
    auto [atom, positive] = literal_parts(a);
    (void)positive;
    assumption_atoms.push_back(atom);
    for (const auto& t : atom->terms) collect_subterms(t, terms);
  }
  // instances from the whole universe stay valid for every signing the
  // caller decides: they are axiom instances either way
  InstantiationResult inst = instantiate_universal_axioms(sig, axioms, terms);
  if (inst.budget_exceeded) {
    unsupported_ = Verdict::unsupported("AXIOM_INSTANTIATION_BUDGET",
                                        "axiom instantiation exceeds the instance budget");
    return;
  }
  // domain constraints apply to the query's own terms; instance-internal
  // terms are pinned by the instances themselves
  solver_.emplace(sig, Formula::conj(inst.instances), assumption_atoms, &terms);
}

Verdict WfSolver::solve(const std::vector<FormulaPtr>& literals) {
  if (unsupported_) return *unsupported_;
  Verdict v = solver_->solve(literals);
  if (v.status == Status::Sat && !v.model->satisfies_literals(literals))
    throw SpecError("internal: WF model fails an input literal");
  return v;
}

Verdict wf_theory_sat(const Signature& sig,
                      const std::vector<std::pair<std::string, FormulaPtr>>& axioms,
                      const std::vector<FormulaPtr>& literals) {
  WfSolver solver(sig, axioms, literals);
  return solver.solve(literals);
}

// ---- unification ----

namespace {

struct Unifier {
  VarMap subst;

  TermPtr walk(TermPtr t) const {
    while (t->kind == Term::Kind::Var) {
      auto it = subst.find(t->var_name);
      if (it == subst.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs(const std::string& v, TermPtr t) const {
    t = walk(t);
    if (t->kind == Term::Kind::Var) return t->var_name == v;
    for (const auto& a : t->args)
      if (occurs(v, a)) return true;
    return false;
  }

  bool unify(TermPtr a, TermPtr b) {
    a = walk(a);
    b = walk(b);
    if (a->kind == Term::Kind::Var && b->kind == Term::Kind::Var &&
        a->var_name == b->var_name)
      return true;
    if (a->kind == Term::Kind::Var) {
      if (a->sort != b->sort || occurs(a->var_name, b)) return false;
      subst[a->var_name] = b;
      return true;
    }
    if (b->kind == Term::Kind::Var) return unify(b, a);
    if (a->fun != b->fun || a->primed != b->primed || a->args.size() != b->args.size())
      return false;
    for (size_t i = 0; i < a->args.size(); ++i)
      if (!unify(a->args[i], b->args[i])) return false;
    return true;
  }

  TermPtr apply(const Signature& sig, TermPtr t) const {
    t = walk(t);
    if (t->kind == Term::Kind::Var) return t;
    bool changed = false;
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) {
      args.push_back(apply(sig, a));
      if (args.back().get() != a.get()) changed = true;
    }
    return changed ? Term::app(sig, t->fun, std::move(args), t->primed) : t;
  }

  FormulaPtr apply_atom(const Signature& sig, const FormulaPtr& atom) const {
    if (atom->kind == Conn::Eq)
      return Formula::eq(apply(sig, atom->terms[0]), apply(sig, atom->terms[1]));
    std::vector<TermPtr> args;
    for (const auto& t : atom->terms) args.push_back(apply(sig, t));
    return Formula::atom(sig, atom->pred, std::move(args), atom->primed);
  }
};

TermPtr rename_vars_term(const Signature& sig, const TermPtr& t, const std::string& suffix) {
  if (t->kind == Term::Kind::Var) return Term::var(t->var_name + suffix, t->sort);
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(rename_vars_term(sig, a, suffix));
  return Term::app(sig, t->fun, std::move(args), t->primed);
}

FormulaPtr rename_vars_atom(const Signature& sig, const FormulaPtr& atom,
                            const std::string& suffix) {
  if (atom->kind == Conn::Eq)
    return Formula::eq(rename_vars_term(sig, atom->terms[0], suffix),
                       rename_vars_term(sig, atom->terms[1], suffix));
  std::vector<TermPtr> args;
  for (const auto& t : atom->terms) args.push_back(rename_vars_term(sig, t, suffix));
  return Formula::atom(sig, atom->pred, std::move(args), atom->primed);
}

void vars_in_order(const TermPtr& t, std::vector<std::pair<std::string, SortId>>& out) {
  if (t->kind == Term::Kind::Var) {
    for (const auto& v : out)
      if (v.first == t->var_name) return;
    out.emplace_back(t->var_name, t->sort);
    return;
  }
  for (const auto& a : t->args) vars_in_order(a, out);
}

// canonical variable names $0, $1, ... in traversal order (variant dedup)
FormulaPtr canonicalize_fact(const Signature& sig, const FormulaPtr& atom) {
  std::vector<std::pair<std::string, SortId>> vars;
  for (const auto& t : atom->terms) vars_in_order(t, vars);
  if (vars.empty()) return atom;
  Unifier u;
  for (size_t i = 0; i < vars.size(); ++i)
    u.subst[vars[i].first] = Term::var("$" + std::to_string(i), vars[i].second);
  return u.apply_atom(sig, atom);
}

struct SaturationEngine {
  const Signature& sig;
  const std::vector<Rule>& rules;
  bool horn_mode;
  int depth_bound;
  const std::map<SortId, std::vector<TermPtr>>* universe;  // datalog head enumeration

  FactBase fb;

  bool add_fact(FormulaPtr atom, Derivation d) {
    atom = canonicalize_fact(sig, atom);
    if (fb.find_fact(atom)) return false;
    if (horn_mode && atom_depth(atom) > depth_bound) return false;
    fb.facts.push_back(std::move(atom));
    fb.derivations.push_back(std::move(d));
    return true;
  }

  // matches body atoms from position i, extending u; calls out on success
  void match(const Rule& rule, size_t i, const Unifier& u, const std::vector<int>& premises,
             const std::function<void(const Unifier&, const std::vector<int>&)>& out) {
    if (i == rule.body.size()) {
      out(u, premises);
      return;
    }
    const FormulaPtr& b = rule.body[i];
    if (b->kind == Conn::Eq) {
      Unifier u2 = u;
      if (u2.unify(b->terms[0], b->terms[1])) match(rule, i + 1, u2, premises, out);
      return;
    }
    size_t known = fb.facts.size();  // facts added during this pass match next pass
    for (size_t fi = 0; fi < known; ++fi) {
      const FormulaPtr& fact = fb.facts[fi];
      if (fact->kind != Conn::Atom || fact->pred != b->pred || fact->primed != b->primed)
        continue;
      FormulaPtr fresh =
          is_ground(fact) ? fact : rename_vars_atom(sig, fact, "~f" + std::to_string(fi));
      Unifier u2 = u;
      bool ok = true;
      for (size_t a = 0; a < b->terms.size(); ++a)
        if (!u2.unify(b->terms[a], fresh->terms[a])) {
          ok = false;
          break;
        }
      if (!ok) continue;
      auto prem2 = premises;
      prem2.push_back(static_cast<int>(fi));
      match(rule, i + 1, u2, prem2, out);
    }
  }

  // instantiates remaining head variables over the universe (datalog only)
  void emit_head(const Rule& rule, const Unifier& u, const std::vector<int>& premises,
                 bool& changed) {
    FormulaPtr head = u.apply_atom(sig, rule.head);
    if (!horn_mode) {
      std::vector<std::pair<std::string, SortId>> open;
      for (const auto& t : head->terms) vars_in_order(t, open);
      if (!open.empty()) {
        if (universe == nullptr)
          throw SpecError("datalog saturation needs a constant universe");
        std::vector<const std::vector<TermPtr>*> doms;
        for (const auto& [vn, vs] : open) {
          (void)vn;
          auto it = universe->find(vs);
          if (it == universe->end() || it->second.empty()) return;  // no constants of this sort
          doms.push_back(&it->second);
        }
        std::vector<size_t> idx(open.size(), 0);
        while (true) {
          Unifier g = u;
          for (size_t i = 0; i < open.size(); ++i) g.subst[open[i].first] = (*doms[i])[idx[i]];
          changed |= add_fact(g.apply_atom(sig, head), {rule.name, premises});
          size_t k = open.size();
          while (k > 0) {
            if (++idx[k - 1] < doms[k - 1]->size()) break;
            idx[k - 1] = 0;
            --k;
          }
          if (k == 0) break;
        }
        return;
      }
    }
    changed |= add_fact(std::move(head), {rule.name, premises});
  }

  void run() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& rule : rules) {
        match(rule, 0, Unifier{}, {},
              [&](const Unifier& u, const std::vector<int>& premises) {
                emit_head(rule, u, premises, changed);
              });
      }
    }
  }
};

bool rule_is_function_free(const Rule& r) {
  auto atom_ok = [](const FormulaPtr& a) {
    std::vector<TermPtr> sub;
    for (const auto& t : a->terms) collect_subterms(t, sub);
    for (const auto& s : sub)
      if (s->kind == Term::Kind::App && !s->args.empty()) return false;
    return true;
  };
  if (!atom_ok(r.head)) return false;
  for (const auto& b : r.body)
    if (!atom_ok(b)) return false;
  return true;
}

} // namespace

// ---- FactBase ----

std::optional<int> FactBase::find_fact(const FormulaPtr& atom) const {
  for (size_t i = 0; i < facts.size(); ++i)
    if (equal(facts[i], atom)) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> FactBase::subsuming_fact(const FormulaPtr& ground_atom,
                                            const Signature& sig) const {
  for (size_t i = 0; i < facts.size(); ++i) {
    const FormulaPtr& f = facts[i];
    if (f->kind != Conn::Atom || f->pred != ground_atom->pred ||
        f->primed != ground_atom->primed)
      continue;
    FormulaPtr fresh = is_ground(f) ? f : rename_vars_atom(sig, f, "~s" + std::to_string(i));
    Unifier u;
    bool ok = true;
    for (size_t a = 0; a < f->terms.size(); ++a)
      if (!u.unify(fresh->terms[a], ground_atom->terms[a])) {
        ok = false;
        break;
      }
    if (ok) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool FactBase::contains_instance(const FormulaPtr& ground_atom, const Signature& sig) const {
  return subsuming_fact(ground_atom, sig).has_value();
}

FactBase datalog_saturate(const Signature& sig, const std::vector<Rule>& rules,
                          const std::vector<FormulaPtr>& base_facts,
                          const std::map<SortId, std::vector<TermPtr>>& universe) {
  for (const auto& r : rules) {
    if (!rule_is_function_free(r))
      throw SpecError("datalog rules must be function-free; use horn mode for rule " + r.name);
  }
  SaturationEngine eng{sig, rules, /*horn_mode=*/false, 0, &universe, {}};
  for (const auto& f : base_facts) {
    if (!is_ground(f)) throw SpecError("datalog base facts must be ground");
    eng.add_fact(f, {"", {}});
  }
  eng.run();
  return std::move(eng.fb);
}

FactBase horn_saturate(const Signature& sig, const std::vector<Rule>& rules,
                       const std::vector<FormulaPtr>& base_facts, int depth_bound) {
  SaturationEngine eng{sig, rules, /*horn_mode=*/true, depth_bound, nullptr, {}};
  for (const auto& f : base_facts) eng.add_fact(f, {"", {}});
  eng.run();
  return std::move(eng.fb);
}

HornResult horn_derive(const Signature& sig, const std::vector<Rule>& rules,
                       const std::vector<FormulaPtr>& base_facts, const FormulaPtr& goal,
                       int depth_bound) {
  if (depth_bound < 0) throw SpecError("horn depth bound must be >= 0");
  HornResult res;
  res.base = horn_saturate(sig, rules, base_facts, depth_bound);
  res.goal_fact = res.base.subsuming_fact(goal, sig);
  res.derivable = res.goal_fact.has_value();
  return res;
}

static void explain_rec(const Signature& sig, const FactBase& fb, int fact, int depth,
                        std::ostringstream& os) {
  for (int i = 0; i < depth; ++i) os << "  ";
  os << print_formula(sig, fb.facts[static_cast<size_t>(fact)]);
  const Derivation& d = fb.derivations[static_cast<size_t>(fact)];
  if (d.rule.empty()) {
    os << "  [given]\n";
    return;
  }
  os << "  [" << d.rule << "]\n";
  for (int p : d.premises) explain_rec(sig, fb, p, depth + 1, os);
}

std::string explain_derivation(const Signature& sig, const FactBase& fb, int fact) {
  std::ostringstream os;
  explain_rec(sig, fb, fact, 0, os);
  return os.str();
}

bool replay_derivation(const Signature& sig, const std::vector<Rule>& rules,
                       const FactBase& fb, int fact) {
  const Derivation& d = fb.derivations[static_cast<size_t>(fact)];
  if (d.rule.empty()) return true;  // base fact
  const Rule* rule = nullptr;
  for (const auto& r : rules)
    if (r.name == d.rule) rule = &r;
  if (!rule) return false;
  // re-match the recorded premises in order
  Unifier u;
  size_t pi = 0;
  for (const auto& b : rule->body) {
    if (b->kind == Conn::Eq) {
      if (!u.unify(b->terms[0], b->terms[1])) return false;
      continue;
    }
    if (pi >= d.premises.size()) return false;
    const FormulaPtr& premise = fb.facts[static_cast<size_t>(d.premises[pi])];
    FormulaPtr fresh = is_ground(premise)
                           ? premise
                           : rename_vars_atom(sig, premise, "~r" + std::to_string(pi));
    for (size_t a = 0; a < b->terms.size(); ++a)
      if (!u.unify(b->terms[a], fresh->terms[a])) return false;
    ++pi;
  }
  if (pi != d.premises.size()) return false;
  FormulaPtr head = u.apply_atom(sig, rule->head);
  // the recorded conclusion must be an instance of the re-derived head
  FormulaPtr conclusion = fb.facts[static_cast<size_t>(fact)];
  Unifier v;
  for (size_t a = 0; a < head->terms.size(); ++a)
    if (!v.unify(head->terms[a], conclusion->terms[a])) return false;
  return true;
}

// ---- PM satisfiability ----

namespace {

struct PmConflict {
  std::vector<FormulaPtr> core;
};

// single satisfiability pass; nullopt when consistent
std::optional<PmConflict> pm_check(const Signature& sig, const std::vector<Rule>& rules,
                                   const std::vector<FormulaPtr>& literals,
                                   const PmQueryOptions& opts, FactBase* out_fb,
                                   CongruenceSolver* out_cc) {
  // direct equality / congruence / EDT-distinctness conflicts first
  auto cc = std::make_unique<CongruenceSolver>(sig);
  if (!cc->assert_literals(literals)) {
    PmConflict c;
    for (int li : cc->conflict_literals())
      c.core.push_back(literals[static_cast<size_t>(li)]);
    return c;
  }

  std::vector<FormulaPtr> positives, negatives, equalities;
  for (const auto& lit : literals) {
    auto [atom, positive] = literal_parts(lit);
    if (atom->kind == Conn::Eq)
      equalities.push_back(lit);
    else if (positive)
      positives.push_back(atom);
    else
      negatives.push_back(atom);
  }

  // EDT exhaustiveness over constants: a constant explicitly distinct from
  // every domain constant contradicts the closed-domain axiom
  {
    std::vector<TermPtr> consts;
    for (const auto& lit : literals) {
      auto [atom, positive] = literal_parts(lit);
      (void)positive;
      std::vector<TermPtr> sub;
      for (const auto& t : atom->terms) collect_subterms(t, sub);
      for (const auto& t : sub) {
        if (t->kind == Term::Kind::App && t->args.empty() &&
            sig.sort(t->sort).enumerated && !sig.fun(t->fun).is_edt_constant) {
          bool dup = false;
          for (const auto& u : consts) dup |= equal(u, t);
          if (!dup) consts.push_back(t);
        }
      }
    }
    for (const auto& t : consts) {
      const auto& dom = sig.edt_domain(t->sort);
      std::vector<FormulaPtr> blocking;
      bool all_blocked = !dom.empty();
      for (FunId c : dom) {
        TermPtr ct = Term::constant(sig, c);
        if (cc->same_class(t, ct)) {
          all_blocked = false;
          break;
        }
        FormulaPtr found;
        for (const auto& lit : equalities) {
          auto [atom, positive] = literal_parts(lit);
          if (positive) continue;
          const auto& l = atom->terms[0];
          const auto& r = atom->terms[1];
          if (l->sort != t->sort) continue;
          if ((cc->same_class(l, t) && cc->same_class(r, ct)) ||
              (cc->same_class(r, t) && cc->same_class(l, ct))) {
            found = lit;
            break;
          }
        }
        if (!found) {
          all_blocked = false;
          break;
        }
        blocking.push_back(found);
      }
      if (all_blocked) {
        PmConflict c;
        c.core = std::move(blocking);
        return c;
      }
    }
  }

  // saturate the normalized positive facts under the rules
  auto norm_atom = [&](const FormulaPtr& a) -> FormulaPtr {
    if (a->kind == Conn::Eq)
      return Formula::eq(cc->normalize_term(a->terms[0]), cc->normalize_term(a->terms[1]));
    std::vector<TermPtr> args;
    for (const auto& t : a->terms) args.push_back(cc->normalize_term(t));
    return Formula::atom(sig, a->pred, std::move(args), a->primed);
  };
  std::vector<Rule> nrules;
  nrules.reserve(rules.size());
  for (const auto& r : rules) {
    Rule nr = r;
    nr.head = norm_atom(nr.head);
    for (auto& b : nr.body) b = norm_atom(b);
    nrules.push_back(std::move(nr));
  }
  std::vector<FormulaPtr> base;
  base.reserve(positives.size());
  for (const auto& p : positives) base.push_back(norm_atom(p));

  FactBase fb;
  if (opts.mode == PmMode::Datalog) {
    std::map<SortId, std::vector<TermPtr>> uni;
    for (const auto& [s, terms] : opts.universe) {
      for (const auto& t : terms) {
        TermPtr n = cc->normalize_term(t);
        auto& v = uni[s];
        bool dup = false;
        for (const auto& u : v) dup |= equal(u, n);
        if (!dup) v.push_back(n);
      }
    }
    fb = datalog_saturate(sig, nrules, base, uni);
  } else {
    fb = horn_saturate(sig, nrules, base, opts.horn_depth);
  }

  for (const auto& n : negatives) {
    FormulaPtr nn = norm_atom(n);
    auto hit = fb.subsuming_fact(nn, sig);
    if (!hit) continue;
    // conservative core: the violated negative literal, the derivation's
    // base facts, and the positive equalities (they drive normalization)
    PmConflict c;
    c.core.push_back(Formula::negate(n));
    std::vector<int> stack{*hit};
    std::vector<bool> seen(fb.facts.size(), false);
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      if (seen[static_cast<size_t>(f)]) continue;
      seen[static_cast<size_t>(f)] = true;
      const Derivation& d = fb.derivations[static_cast<size_t>(f)];
      if (d.rule.empty()) {
        for (const auto& p : positives)
          if (equal(norm_atom(p), fb.facts[static_cast<size_t>(f)])) {
            c.core.push_back(p);
            break;
          }
      }
      for (int pr : d.premises) stack.push_back(pr);
    }
    for (const auto& e : equalities) {
      auto [atom, positive] = literal_parts(e);
      (void)atom;
      if (positive) c.core.push_back(e);
    }
    return c;
  }

  if (out_fb) *out_fb = std::move(fb);
  if (out_cc) *out_cc = std::move(*cc);
  return std::nullopt;
}

} // namespace

Verdict pm_theory_sat(const Signature& sig, const std::vector<Rule>& rules,
                      const std::vector<FormulaPtr>& literals, const PmQueryOptions& opts) {
  FactBase fb;
  CongruenceSolver cc(sig);
  auto conflict = pm_check(sig, rules, literals, opts, &fb, &cc);
  if (!conflict) {
    FiniteStructure model = cc.build_model();
    // extend the quotient structure with derived ground facts that evaluate
    // inside it (open facts live only in the infinite model)
    for (const auto& f : fb.facts) {
      if (!is_ground(f)) continue;
      std::vector<int> tuple;
      bool ok = true;
      for (const auto& t : f->terms) {
        auto e = model.eval_term(t, {});
        if (!e) {
          ok = false;
          break;
        }
        tuple.push_back(*e);
      }
      if (ok) model.preds[{f->pred, f->primed}].insert(std::move(tuple));
    }
    if (!model.satisfies_literals(literals))
      throw SpecError("internal: PM model fails an input literal");
    return Verdict::sat(std::move(model));
  }
  // verify, then greedily minimize the conservative core
  std::vector<FormulaPtr> core = std::move(conflict->core);
  if (pm_check(sig, rules, core, opts, nullptr, nullptr) == std::nullopt)
    core = literals;  // conservative core was too small: minimize the full set
  size_t i = 0;
  while (i < core.size()) {
    std::vector<FormulaPtr> without;
    without.reserve(core.size() - 1);
    for (size_t j = 0; j < core.size(); ++j)
      if (j != i) without.push_back(core[j]);
    if (pm_check(sig, rules, without, opts, nullptr, nullptr) != std::nullopt)
      core = std::move(without);
    else
      ++i;
  }
  return Verdict::unsat(std::move(core));
}

} // namespace soverify
