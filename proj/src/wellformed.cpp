#include "soverify/wellformed.hpp"

namespace soverify {

namespace {

bool rule_has_function_symbols(const Rule& r) {
  auto has = [](const FormulaPtr& a) {
    std::vector<TermPtr> sub;
    for (const auto& t : a->terms) collect_subterms(t, sub);
    for (const auto& s : sub)
      if (s->kind == Term::Kind::App && !s->args.empty()) return true;
    return false;
  };
  if (has(r.head)) return true;
  for (const auto& b : r.body)
    if (has(b)) return true;
  return false;
}

bool rule_uses_wf_symbol(const Signature& sig, const Rule& r) {
  auto bad_term = [&](const TermPtr& t) {
    std::vector<TermPtr> sub;
    collect_subterms(t, sub);
    for (const auto& s : sub) {
      if (s->kind != Term::Kind::App) continue;
      Level lv = sig.fun(s->fun).level;
      if (lv == Level::WF || lv == Level::StateVar) return true;
    }
    return false;
  };
  auto bad_atom = [&](const FormulaPtr& a) {
    if (a->kind == Conn::Atom && sig.pred(a->pred).level == Level::WF) return true;
    for (const auto& t : a->terms)
      if (bad_term(t)) return true;
    return false;
  };
  if (bad_atom(r.head)) return true;
  for (const auto& b : r.body)
    if (bad_atom(b)) return true;
  return false;
}

} // namespace

std::vector<Diagnostic> check_wellformedness(const TwoLevelSystem& sys, TaskMode mode) {
  std::vector<Diagnostic> out;
  const Signature& sig = sys.sig;

  if (sys.substrate.id_sort == kNoSort) {
    out.push_back({"MISSING_ID_SORT",
                   "the substrate must declare the sort Id that identifies principals"});
    return out;
  }

  if (mode == TaskMode::Executability) {
    // a known and finite set of principals: EDT over Id
    bool id_is_edt = false;
    for (SortId s : sys.substrate.edt_sorts) id_is_edt |= s == sys.substrate.id_sort;
    if (!id_is_edt)
      out.push_back({"NOT_EDT_SUBSTRATE",
                     "executability checking requires an enumerated substrate over Id "
                     "(a known and finite set of principals)"});
  } else {
    if (!sys.substrate.equivalence)
      out.push_back({"NOT_EQUIV_SUBSTRATE",
                     "invariant checking requires the equivalence-relation substrate over Id "
                     "(parameterized number of principals)"});
    // no WF function may produce identifiers
    for (size_t i = 0; i < sig.num_funs(); ++i) {
      const FunDecl& d = sig.fun(static_cast<FunId>(i));
      if ((d.level == Level::WF || d.level == Level::StateVar) && !d.args.empty() &&
          d.result == sys.substrate.id_sort)
        out.push_back({"ID_VALUED_WF_FUNCTION",
                       "workflow function " + d.name +
                           " produces identifiers; invariant checking requires that no "
                           "WF function has result sort Id"});
    }
    // the PM theory must be a BSR/Datalog theory (function-free rules)
    if (sys.pm.mode == PmMode::HornDepthBounded)
      out.push_back({"PM_NOT_BSR",
                     "invariant checking requires a function-free (BSR/Datalog) policy "
                     "theory; depth-bounded Horn mode is not admissible"});
    for (const auto& r : sys.pm.rules)
      if (rule_has_function_symbols(r)) {
        out.push_back({"PM_NOT_BSR", "policy rule " + r.name +
                                         " uses function symbols; invariant checking "
                                         "requires function-free rules"});
        break;
      }
  }

  // state predicates stay intensional: the policy theory must not pin their
  // extension with ground facts, or transitions could contradict the theory
  for (const auto& r : sys.pm.rules) {
    if (!r.body.empty()) continue;
    if (r.head->kind == Conn::Atom && sig.pred(r.head->pred).level == Level::StatePred)
      out.push_back({"EXTENSIONAL_STATE_PRED_FACT",
                     "rule " + r.name + " asserts state predicate " +
                         sig.pred(r.head->pred).name +
                         " as a policy fact; state tables are written by transitions only"});
  }

  // policy rules may only use policy and substrate symbols
  for (const auto& r : sys.pm.rules)
    if (rule_uses_wf_symbol(sig, r))
      out.push_back({"RULE_USES_WF_SYMBOL",
                     "rule " + r.name +
                         " mentions a workflow-level symbol; shared symbols belong in "
                         "the substrate"});

  return out;
}

} // namespace soverify
