#include "soverify/symexec.hpp"

#include <algorithm>
#include <cassert>

#include "soverify/printer.hpp"
#include "soverify/transform.hpp"

namespace soverify {

InstantiatedTransition instantiate_transition(Signature& sig, const Transition& tau,
                                              const std::string& prefix) {
  InstantiatedTransition inst;
  VarMap witness_map;
  auto skolemize = [&](const std::vector<std::pair<std::string, SortId>>& vars) {
    for (const auto& [name, sort] : vars) {
      Level level = sig.sort(sort).level;
      if (level == Level::StateVar || level == Level::StatePred) level = Level::WF;
      FunId c = sig.add_fresh_constant(prefix + name, sort, level);
      inst.witnesses.emplace_back(name, c);
      witness_map[name] = Term::constant(sig, c);
    }
  };
  skolemize(tau.id_vars);
  skolemize(tau.data_vars);
  inst.guard = substitute(sig, tau.guard, witness_map);
  for (const auto& [x, t] : tau.wf_updates)
    inst.wf_updates[x] = substitute(sig, t, witness_map);
  for (const auto& u : tau.pm_updates) {
    PredicateUpdate v = u;
    VarMap shadowed = witness_map;
    for (const auto& [pn, ps] : u.params) {
      (void)ps;
      shadowed.erase(pn);
    }
    v.def = substitute(sig, u.def, shadowed);
    inst.pm_updates[u.pred] = std::move(v);
  }
  return inst;
}

namespace {

// disjunctive normal form of a small quantifier-free formula; each disjunct
// is a list of literals. Size-guarded: returns false on blowup.
bool to_dnf(const FormulaPtr& f, bool positive, std::vector<std::vector<FormulaPtr>>& out,
            size_t limit = 256) {
  switch (f->kind) {
    case Conn::True:
      if (positive) out.push_back({});
      return true;
    case Conn::False:
      if (!positive) out.push_back({});
      return true;
    case Conn::Atom:
    case Conn::Eq:
      out.push_back({positive ? f : Formula::negate(f)});
      return true;
    case Conn::Not:
      return to_dnf(f->kids[0], !positive, out, limit);
    case Conn::And:
    case Conn::Or: {
      bool conjunctive = (f->kind == Conn::And) == positive;
      if (!conjunctive) {
        for (const auto& k : f->kids) {
          if (!to_dnf(k, positive, out, limit)) return false;
          if (out.size() > limit) return false;
        }
        return true;
      }
      std::vector<std::vector<FormulaPtr>> acc{{}};
      for (const auto& k : f->kids) {
        std::vector<std::vector<FormulaPtr>> branch;
        if (!to_dnf(k, positive, branch, limit)) return false;
        std::vector<std::vector<FormulaPtr>> next;
        for (const auto& a : acc)
          for (const auto& b : branch) {
            auto merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            next.push_back(std::move(merged));
            if (next.size() > limit) return false;
          }
        acc = std::move(next);
      }
      for (auto& d : acc) out.push_back(std::move(d));
      return out.size() <= limit;
    }
    case Conn::Implies: {
      FormulaPtr rewritten = Formula::disj({Formula::negate(f->kids[0]), f->kids[1]});
      return to_dnf(rewritten, positive, out, limit);
    }
    case Conn::Iff: {
      FormulaPtr rewritten =
          Formula::disj({Formula::conj({f->kids[0], f->kids[1]}),
                         Formula::conj({Formula::negate(f->kids[0]),
                                        Formula::negate(f->kids[1])})});
      return to_dnf(rewritten, positive, out, limit);
    }
    default:
      return false;  // quantifiers: not expected here
  }
}

bool body_reads_state(const Signature& sig, const Rule& r) {
  for (const auto& b : r.body)
    if (b->kind == Conn::Atom && sig.pred(b->pred).level == Level::StatePred) return true;
  return false;
}

} // namespace

std::optional<Verdict> add_post_state_rules(const Signature& sig, TaskMode mode,
                                            const InstantiatedTransition& inst,
                                            std::vector<Rule>& rules,
                                            std::vector<FormulaPtr>& constraints) {
  std::vector<Rule> copies;
  for (const auto& r : rules) {
    bool head_is_state =
        r.head->kind == Conn::Atom && sig.pred(r.head->pred).level == Level::StatePred;
    if (!head_is_state && !body_reads_state(sig, r)) continue;  // copy would be identical

    // prime the state atoms, then beta-reduce through the updates
    auto reduce_atom = [&](const FormulaPtr& a) -> FormulaPtr {
      if (a->kind != Conn::Atom || sig.pred(a->pred).level != Level::StatePred) return a;
      FormulaPtr primed = Formula::atom(sig, a->pred, a->terms, true);
      return apply_updates(sig, primed, inst.wf_updates, inst.pm_updates);
    };

    std::vector<FormulaPtr> body_parts;
    for (const auto& b : r.body) body_parts.push_back(reduce_atom(b));
    FormulaPtr body = Formula::conj(std::move(body_parts));

    if (head_is_state) {
      // the updated table must still satisfy the rule: a constraint, not a
      // saturation rule
      FormulaPtr head_reduced = reduce_atom(r.head);
      FormulaPtr constraint = Formula::implies(body, head_reduced);
      std::vector<std::pair<std::string, SortId>> vars;
      collect_free_vars(constraint, vars);
      FormulaPtr closed = Formula::forall(vars, constraint);
      if (mode == TaskMode::Executability) {
        try {
          constraints.push_back(ground_over_edt(sig, closed));
        } catch (const SpecError&) {
          return Verdict::unsupported(
              "STATE_PRED_POST_RULE",
              "rule " + r.name +
                  " heads a state predicate and its post-state constraint cannot be "
                  "grounded over enumerated sorts");
        }
      } else {
        constraints.push_back(closed);  // forall-Id part, checked downstream
      }
      continue;
    }

    // intensional head: split the reduced body back into Horn shape
    std::vector<std::vector<FormulaPtr>> disjuncts;
    if (!to_dnf(body, true, disjuncts))
      return Verdict::unsupported("NON_HORN_POST_RULE",
                                  "post-state copy of rule " + r.name +
                                      " exceeds the clausal budget");
    int k = 0;
    for (const auto& d : disjuncts) {
      Rule copy;
      copy.name = r.name + "@post" + std::to_string(++k);
      copy.head = r.head;
      bool ok = true;
      for (const auto& lit : d) {
        auto [atom, positive] = literal_parts(lit);
        if (!positive) {
          // a negated atom in a rule body leaves Horn; equalities between
          // distinct EDT constants are statically false and drop the branch
          if (atom->kind == Conn::Eq) {
            const TermPtr& l = atom->terms[0];
            const TermPtr& rr = atom->terms[1];
            if (l->kind == Term::Kind::App && rr->kind == Term::Kind::App &&
                l->args.empty() && rr->args.empty() &&
                sig.fun(l->fun).is_edt_constant && sig.fun(rr->fun).is_edt_constant) {
              if (l->fun != rr->fun) continue;  // constant disequality: trivially true
              ok = false;                       // c != c: branch is dead
              break;
            }
          }
          return Verdict::unsupported("NON_HORN_POST_RULE",
                                      "post-state copy of rule " + r.name +
                                          " has a negative body literal");
        }
        if (atom->kind == Conn::Eq && equal(atom->terms[0], atom->terms[1]))
          continue;  // trivially true
        copy.body.push_back(atom);
      }
      if (ok) copies.push_back(std::move(copy));
    }
  }
  rules.insert(rules.end(), copies.begin(), copies.end());
  return std::nullopt;
}

ObligationQuery reduce_triple(const TwoLevelSystem& sys, const FormulaPtr& pre,
                              const Transition& tau, const FormulaPtr& post,
                              const std::string& label) {
  if (!is_quantifier_free(pre) || !is_quantifier_free(post))
    throw SpecError(
        "scenario formulas must be quantifier-free (executability verification "
        "assumption)");
  ObligationQuery q;
  q.ctx = TheoryContext::for_system(sys, SubstrateMode::Edt);
  InstantiatedTransition inst = instantiate_transition(q.ctx.sig, tau, label + ".");
  q.witnesses = inst.witnesses;

  FormulaPtr post_primed = prime_state_symbols(q.ctx.sig, post);
  FormulaPtr post_reduced =
      apply_updates(q.ctx.sig, post_primed, inst.wf_updates, inst.pm_updates);

  std::vector<FormulaPtr> constraints;
  if (auto blocked = add_post_state_rules(q.ctx.sig, TaskMode::Executability, inst,
                                          q.ctx.pm_rules, constraints)) {
    q.blocked = blocked;
    return q;
  }
  std::vector<FormulaPtr> parts{pre, inst.guard, Formula::negate(post_reduced)};
  parts.insert(parts.end(), constraints.begin(), constraints.end());
  q.formula = Formula::conj(std::move(parts));
  if (contains_primed(q.formula))
    throw SpecError("internal: reduced triple mentions a primed symbol");
  if (!is_quantifier_free(q.formula))
    throw SpecError("internal: reduced triple is not quantifier-free");
  return q;
}

namespace {

std::string element_name(const FiniteStructure& m, SortId sort, int elem) {
  const auto& dom = m.domains.at(static_cast<size_t>(sort));
  return dom.at(static_cast<size_t>(elem));
}

std::vector<std::pair<std::string, std::string>> witness_values(
    const Signature& sig, const FiniteStructure& m,
    const std::vector<std::pair<std::string, FunId>>& witnesses) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [var, c] : witnesses) {
    TermPtr t = Term::constant(sig, c);
    auto e = m.eval_term(t, {});
    // a witness the query never constrains satisfies the step for any value
    out.emplace_back(var, e ? element_name(m, sig.fun(c).result, *e) : "any");
  }
  return out;
}

} // namespace

TripleResult check_triple(const TwoLevelSystem& sys, const FormulaPtr& pre,
                          const Transition& tau, const FormulaPtr& post,
                          const std::string& label, TraceSink trace) {
  TripleResult res;
  ObligationQuery q = reduce_triple(sys, pre, tau, post, label);
  if (q.blocked) {
    res.status = TripleStatus::Unsupported;
    res.reason = q.blocked->reason;
    res.reason_code = q.blocked->reason_code;
    return res;
  }
  res.reduced = q.formula;
  res.obligation_text = print_formula(q.ctx.sig, q.formula);
  for (const auto& [var, c] : q.witnesses)
    res.fresh_consts.emplace_back(q.ctx.sig.fun(c).name,
                                  q.ctx.sig.sort(q.ctx.sig.fun(c).result).name);
  Verdict v = tsoa_sat(q.ctx, q.formula, std::move(trace));
  switch (v.status) {
    case Status::Unsat:
      res.status = TripleStatus::Valid;
      break;
    case Status::Sat:
      res.status = TripleStatus::Invalid;
      res.countermodel = std::move(v.model);
      res.witness_values = witness_values(q.ctx.sig, *res.countermodel, q.witnesses);
      break;
    case Status::Unsupported:
      res.status = TripleStatus::Unsupported;
      res.reason = v.reason;
      res.reason_code = v.reason_code;
      break;
  }
  return res;
}

EnabledResult check_enabled(const TwoLevelSystem& sys, const FormulaPtr& pre,
                            const Transition& tau, const std::string& label,
                            TraceSink trace) {
  EnabledResult res;
  TheoryContext ctx = TheoryContext::for_system(sys, SubstrateMode::Edt);
  InstantiatedTransition inst = instantiate_transition(ctx.sig, tau, label + ".");
  res.query = Formula::conj({pre, inst.guard});
  Verdict v = tsoa_sat(ctx, res.query, std::move(trace));
  if (v.status == Status::Unsupported) {
    res.unsupported = true;
    res.reason = v.reason;
    res.reason_code = v.reason_code;
    return res;
  }
  res.enabled = v.status == Status::Sat;
  if (res.enabled) res.witness = witness_values(ctx.sig, *v.model, inst.witnesses);
  return res;
}

ScenarioReport run_scenario(const TwoLevelSystem& sys, const Scenario& sc, TraceSink trace) {
  ScenarioReport rep;
  rep.scenario = sc.name;
  rep.system = sys.name;
  rep.diagnostics = check_wellformedness(sys, TaskMode::Executability);
  if (!rep.diagnostics.empty()) {
    rep.verdict = "unsupported";
    return rep;
  }
  bool all_valid = true;
  bool any_unsupported = false;
  for (size_t i = 0; i < sc.transitions.size(); ++i) {
    const Transition* tau = sys.find_transition(sc.transitions[i]);
    if (!tau) throw SpecError("unknown transition " + sc.transitions[i]);
    StepReport step;
    step.index = static_cast<int>(i);
    step.transition = tau->name;
    std::string label = sc.name + "." + tau->name + "." + std::to_string(i);
    step.enabled = check_enabled(sys, sc.states[i], *tau, label, trace);
    step.triple = check_triple(sys, sc.states[i], *tau, sc.states[i + 1], label, trace);
    any_unsupported |= step.enabled.unsupported;
    any_unsupported |= step.triple.status == TripleStatus::Unsupported;
    all_valid &= step.enabled.enabled && step.triple.status == TripleStatus::Valid;
    rep.steps.push_back(std::move(step));
  }
  rep.verdict = any_unsupported ? "unsupported" : (all_valid ? "valid" : "invalid");
  return rep;
}

} // namespace soverify
