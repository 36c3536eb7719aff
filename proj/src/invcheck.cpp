#include "soverify/invcheck.hpp"

#include <cassert>
#include <future>

#include "soverify/printer.hpp"
#include "soverify/transform.hpp"

namespace soverify {

namespace {

// forall-prefix and matrix of a candidate/target formula
struct Split {
  std::vector<std::pair<std::string, SortId>> vars;
  FormulaPtr matrix;
};

Split split_forall(const FormulaPtr& f) {
  Split s;
  FormulaPtr body = f;
  while (body->kind == Conn::Forall) {
    for (const auto& b : body->binders) s.vars.push_back(b);
    body = body->kids[0];
  }
  s.matrix = body;
  return s;
}

// Skolemizes the forall prefix of f's negation: not(forall i. M) becomes
// not M(k) with fresh constants k.
FormulaPtr negate_skolemized(Signature& sig, const FormulaPtr& f, const std::string& prefix) {
  Split s = split_forall(f);
  VarMap m;
  for (const auto& [name, sort] : s.vars) {
    Level level = sig.sort(sort).level;
    if (level == Level::StateVar || level == Level::StatePred) level = Level::WF;
    FunId c = sig.add_fresh_constant(prefix + name, sort, level);
    m[name] = Term::constant(sig, c);
  }
  return Formula::negate(substitute(sig, s.matrix, m));
}

// Eq.-(1) initial formula in prenex forall form: the id variables and every
// definition's parameters in one block over a quantifier-free matrix.
FormulaPtr initial_formula_prenex(const TwoLevelSystem& sys) {
  const Signature& sig = sys.sig;
  std::vector<std::pair<std::string, SortId>> binders = sys.init.id_vars;
  std::vector<FormulaPtr> matrix{sys.init.wf_part};
  int n = 0;
  for (const auto& def : sys.init.pm_defs) {
    ++n;
    // rename the definition parameters apart
    VarMap ren;
    std::vector<TermPtr> args;
    for (const auto& [pn, ps] : def.params) {
      std::string fresh = "z" + std::to_string(n) + "_" + pn;
      ren[pn] = Term::var(fresh, ps);
      binders.emplace_back(fresh, ps);
      args.push_back(ren[pn]);
    }
    FormulaPtr lhs = Formula::atom(sig, def.pred, std::move(args));
    FormulaPtr rhs = substitute(sig, def.def, ren);
    matrix.push_back(Formula::iff(std::move(lhs), std::move(rhs)));
  }
  return Formula::forall(std::move(binders), Formula::conj(std::move(matrix)));
}

} // namespace

std::pair<InvObligation, InvObligation> build_I1_I2(const TwoLevelSystem& sys,
                                                    const FormulaPtr& candidate,
                                                    const FormulaPtr& target) {
  InvObligation i1, i2;
  i1.kind = InvKind::I1;
  i2.kind = InvKind::I2;

  i1.query.ctx = TheoryContext::for_system(sys, SubstrateMode::Equiv);
  FormulaPtr iota = initial_formula_prenex(sys);
  FormulaPtr not_psi = negate_skolemized(i1.query.ctx.sig, candidate, "I1.");
  i1.query.formula = Formula::conj({iota, not_psi});

  i2.query.ctx = TheoryContext::for_system(sys, SubstrateMode::Equiv);
  FormulaPtr not_phi = negate_skolemized(i2.query.ctx.sig, target, "I2.");
  i2.query.formula = Formula::conj({candidate, not_phi});
  return {std::move(i1), std::move(i2)};
}

InvObligation negate_preservation(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                                  const Transition& tau) {
  InvObligation ob;
  ob.kind = InvKind::I3;
  ob.transition = tau.name;
  ob.query.ctx = TheoryContext::for_system(sys, SubstrateMode::Equiv);
  Signature& sig = ob.query.ctx.sig;

  // transition witnesses k, d as Skolem constants
  InstantiatedTransition inst = instantiate_transition(sig, tau, tau.name + ".I3.");
  ob.query.witnesses = inst.witnesses;

  // the violated post instance: psi's variables j Skolemized, state symbols
  // primed, then beta-reduced through the updates
  Split s = split_forall(candidate);
  VarMap jmap;
  for (const auto& [name, sort] : s.vars) {
    FunId c = sig.add_fresh_constant(tau.name + ".I3.j_" + name, sort, Level::Substrate);
    jmap[name] = Term::constant(sig, c);
  }
  FormulaPtr post_instance = substitute(sig, s.matrix, jmap);
  FormulaPtr post_primed = prime_state_symbols(sig, post_instance);
  FormulaPtr post_reduced =
      apply_updates(sig, post_primed, inst.wf_updates, inst.pm_updates);

  std::vector<FormulaPtr> constraints;
  if (auto blocked = add_post_state_rules(sig, TaskMode::Invariant, inst,
                                          ob.query.ctx.pm_rules, constraints)) {
    ob.query.blocked = blocked;
    return ob;
  }

  // psi1' and forall j. psi2': the quantifier-free part collects the guard,
  // the violated instance and any post-state constraints
  std::vector<FormulaPtr> parts{candidate, inst.guard, Formula::negate(post_reduced)};
  parts.insert(parts.end(), constraints.begin(), constraints.end());
  ob.query.formula = Formula::conj(std::move(parts));
  if (contains_primed(ob.query.formula))
    throw SpecError("internal: preservation obligation mentions a primed symbol");
  // structural shape: a conjunction of forall-Id parts and qf parts
  std::vector<FormulaPtr> shape =
      ob.query.formula->kind == Conn::And ? ob.query.formula->kids
                                          : std::vector<FormulaPtr>{ob.query.formula};
  for (const auto& part : shape) {
    if (!is_quantifier_free(part) && part->kind != Conn::Forall)
      throw SpecError("internal: preservation obligation is not in psi1' and forall.psi2' shape");
  }
  return ob;
}

namespace {

InvObligationReport dispatch(const InvObligation& ob, TraceSink trace) {
  InvObligationReport rep;
  rep.kind = ob.kind == InvKind::I1 ? "I1" : ob.kind == InvKind::I2 ? "I2" : "I3";
  rep.transition = ob.transition;
  rep.formula = ob.query.formula;
  if (ob.query.formula) {
    rep.obligation_text = print_formula(ob.query.ctx.sig, ob.query.formula);
    for (const auto& [var, c] : ob.query.witnesses)
      rep.fresh_consts.emplace_back(
          ob.query.ctx.sig.fun(c).name,
          ob.query.ctx.sig.sort(ob.query.ctx.sig.fun(c).result).name);
  }
  if (ob.query.blocked) {
    rep.verdict = "unsupported";
    rep.reason = ob.query.blocked->reason;
    rep.reason_code = ob.query.blocked->reason_code;
    return rep;
  }
  Verdict v = tsoa_sat_universal(ob.query.ctx, ob.query.formula, std::move(trace));
  switch (v.status) {
    case Status::Unsat:
      rep.verdict = "holds";
      break;
    case Status::Sat:
      rep.verdict = "counterexample-to-induction";
      rep.counterexample = std::move(v.model);
      break;
    case Status::Unsupported:
      rep.verdict = "unsupported";
      rep.reason = v.reason;
      rep.reason_code = v.reason_code;
      break;
  }
  return rep;
}

} // namespace

InvariantReport check_inductive(const TwoLevelSystem& sys, const InvariantTask& task,
                                int jobs, TraceSink trace) {
  InvariantReport rep;
  rep.task = task.name;
  rep.system = sys.name;

  // fragment membership first: this is the diagnosis the tool must give for
  // properties outside the forall-Id class, regardless of the substrate
  for (const FormulaPtr& f : {task.target, task.candidate}) {
    if (auto bad = check_forall_id_fragment(sys.sig, f, sys.substrate.id_sort)) {
      InvObligationReport r;
      r.kind = "fragment";
      r.verdict = "unsupported";
      r.reason = bad->reason;
      r.reason_code = bad->reason_code;
      r.formula = f;
      rep.obligations.push_back(std::move(r));
      rep.verdict = "unsupported";
      return rep;
    }
  }

  rep.diagnostics = check_wellformedness(sys, TaskMode::Invariant);
  if (!rep.diagnostics.empty()) {
    rep.verdict = "unsupported";
    return rep;
  }

  std::vector<InvObligation> obligations;
  auto [i1, i2] = build_I1_I2(sys, task.candidate, task.target);
  obligations.push_back(std::move(i1));
  obligations.push_back(std::move(i2));
  for (const auto& tau : sys.transitions)
    obligations.push_back(negate_preservation(sys, task.candidate, tau));

  rep.obligations.resize(obligations.size());
  if (jobs > 1) {
    // obligations are independent; join in declaration order
    std::vector<std::future<InvObligationReport>> futs;
    for (const auto& ob : obligations)
      futs.push_back(std::async(std::launch::async,
                                [&ob, &trace] { return dispatch(ob, trace); }));
    for (size_t i = 0; i < futs.size(); ++i) rep.obligations[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < obligations.size(); ++i)
      rep.obligations[i] = dispatch(obligations[i], trace);
  }

  bool all_hold = true, any_unsupported = false;
  for (const auto& r : rep.obligations) {
    all_hold &= r.verdict == "holds";
    any_unsupported |= r.verdict == "unsupported";
  }
  rep.verdict = any_unsupported ? "unsupported" : (all_hold ? "established" : "not-established");
  return rep;
}

} // namespace soverify
