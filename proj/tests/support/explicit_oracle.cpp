#include "support/explicit_oracle.hpp"

#include <functional>

#include "soverify/transform.hpp"

namespace soverify::testing {

namespace {

using Env = FiniteStructure::Env;

std::vector<std::vector<int>> all_tuples(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> out;
  for (int s : sizes)
    if (s == 0) return out;
  std::vector<int> idx(sizes.size(), 0);
  while (true) {
    out.push_back(idx);
    size_t k = idx.size();
    while (k > 0) {
      if (++idx[k - 1] < sizes[k - 1]) break;
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

// enumerate every subset of rows as a predicate table
bool enumerate_tables(FiniteStructure& m, const Signature& sig,
                      const std::vector<PredId>& preds, size_t pi,
                      const std::function<bool(FiniteStructure&)>& cb) {
  if (pi == preds.size()) return cb(m);
  const PredDecl& d = sig.pred(preds[pi]);
  std::vector<int> sizes;
  for (SortId s : d.args) sizes.push_back(m.domain_size(s));
  auto rows = all_tuples(sizes);
  if (rows.size() > 16) throw SpecError("oracle: table too large");
  for (uint64_t bits = 0; bits < (1ULL << rows.size()); ++bits) {
    auto& table = m.preds[{preds[pi], false}];
    table.clear();
    for (size_t r = 0; r < rows.size(); ++r)
      if (bits & (1ULL << r)) table.insert(rows[r]);
    if (!enumerate_tables(m, sig, preds, pi + 1, cb)) return false;
  }
  m.preds.erase({preds[pi], false});
  return true;
}

// do all rules hold in m, reading state predicates from `state_key` primed
// variants when primed=true
bool rules_hold(const FiniteStructure& m, const Signature& sig,
                const std::vector<Rule>& rules, SortId id_sort, bool primed_state) {
  (void)id_sort;
  for (const auto& rule : rules) {
    std::vector<std::pair<std::string, SortId>> vars;
    {
      std::vector<std::pair<std::string, SortId>> seen;
      auto collect = [&](const FormulaPtr& a) {
        std::vector<std::pair<std::string, SortId>> vs;
        collect_free_vars(a, vs);
        for (const auto& v : vs) {
          bool dup = false;
          for (const auto& u : seen) dup |= u.first == v.first;
          if (!dup) seen.push_back(v);
        }
      };
      collect(rule.head);
      for (const auto& b : rule.body) collect(b);
      vars = seen;
    }
    std::vector<int> sizes;
    for (const auto& [n, s] : vars) {
      (void)n;
      sizes.push_back(m.domain_size(s));
    }
    auto eval_atom = [&](const FormulaPtr& a, const Env& env) -> bool {
      FormulaPtr use = a;
      if (primed_state && a->kind == Conn::Atom &&
          sig.pred(a->pred).level == Level::StatePred)
        use = Formula::atom(sig, a->pred, a->terms, true);
      auto v = m.eval(use, env);
      if (!v) throw SpecError("oracle: rule atom not evaluable");
      return *v;
    };
    for (const auto& tuple : all_tuples(sizes)) {
      Env env;
      for (size_t i = 0; i < vars.size(); ++i) env[vars[i].first] = tuple[i];
      bool body = true;
      for (const auto& b : rule.body) body &= eval_atom(b, env);
      if (body && !eval_atom(rule.head, env)) return false;
    }
  }
  return true;
}

// computes the post-state tables/valuation from the transition's updates
// under a witness environment, storing them as primed entries of m
void apply_transition(FiniteStructure& m, const Signature& sig, const Transition& tau,
                      const Env& witness) {
  for (const auto& [x, t] : tau.wf_updates) {
    auto v = m.eval_term(t, witness);
    if (!v) throw SpecError("oracle: update term not evaluable");
    m.funcs[{x, true}][{}] = *v;
  }
  for (const auto& u : tau.pm_updates) {
    std::vector<int> sizes;
    for (const auto& [pn, ps] : u.params) {
      (void)pn;
      sizes.push_back(m.domain_size(ps));
    }
    auto& table = m.preds[{u.pred, true}];
    table.clear();
    for (const auto& tuple : all_tuples(sizes)) {
      Env env = witness;
      for (size_t i = 0; i < u.params.size(); ++i) env[u.params[i].first] = tuple[i];
      auto v = m.eval(u.def, env);
      if (!v) throw SpecError("oracle: update definition not evaluable");
      if (*v) table.insert(tuple);
    }
  }
}

// re-reads a post-state formula against the primed entries
FormulaPtr primed_copy(const Signature& sig, const FormulaPtr& f) {
  return prime_state_symbols(sig, f);
}

struct ToyShape {
  std::vector<PredId> state_preds;
  std::vector<PredId> pm_preds;  // intensional policy predicates
};

ToyShape shape_of(const TwoLevelSystem& sys) {
  ToyShape sh;
  sh.state_preds = sys.state_preds;
  for (size_t i = 0; i < sys.sig.num_preds(); ++i) {
    const PredDecl& d = sys.sig.pred(static_cast<PredId>(i));
    if (d.level == Level::PM) sh.pm_preds.push_back(static_cast<PredId>(i));
  }
  return sh;
}

// base structure for executability toys: every sort enumerated
FiniteStructure exec_base(const TwoLevelSystem& sys) {
  const Signature& sig = sys.sig;
  FiniteStructure m;
  m.domains.resize(sig.num_sorts());
  for (size_t s = 0; s < sig.num_sorts(); ++s) {
    const SortDecl& d = sig.sort(static_cast<SortId>(s));
    if (!d.enumerated) throw SpecError("executability toys must use enumerated sorts only");
    for (FunId c : d.edt_constants) m.domains[s].push_back(sig.fun(c).name);
  }
  for (size_t s = 0; s < sig.num_sorts(); ++s) {
    const SortDecl& d = sig.sort(static_cast<SortId>(s));
    for (size_t i = 0; i < d.edt_constants.size(); ++i)
      m.funcs[{d.edt_constants[i], false}][{}] = static_cast<int>(i);
  }
  return m;
}

// enumerates (state-var valuation, state tables, policy tables) and calls cb
bool enumerate_exec_states(const TwoLevelSystem& sys, FiniteStructure& m,
                           const std::function<bool(FiniteStructure&)>& cb) {
  const Signature& sig = sys.sig;
  std::function<bool(size_t)> enum_vars = [&](size_t vi) -> bool {
    if (vi == sys.state_vars.size()) {
      ToyShape sh = shape_of(sys);
      std::vector<PredId> all = sh.state_preds;
      all.insert(all.end(), sh.pm_preds.begin(), sh.pm_preds.end());
      return enumerate_tables(m, sig, all, 0, cb);
    }
    FunId x = sys.state_vars[vi];
    int n = m.domain_size(sig.fun(x).result);
    for (int v = 0; v < n; ++v) {
      m.funcs[{x, false}][{}] = v;
      if (!enum_vars(vi + 1)) return false;
    }
    return true;
  };
  return enum_vars(0);
}

bool enumerate_witnesses(const TwoLevelSystem& sys, const Transition& tau,
                         const FiniteStructure& m,
                         const std::function<bool(const Env&)>& cb) {
  std::vector<std::pair<std::string, SortId>> vars = tau.id_vars;
  vars.insert(vars.end(), tau.data_vars.begin(), tau.data_vars.end());
  std::vector<int> sizes;
  for (const auto& [n, s] : vars) {
    (void)n;
    sizes.push_back(m.domain_size(s));
  }
  for (const auto& tuple : all_tuples(sizes)) {
    Env env;
    for (size_t i = 0; i < vars.size(); ++i) env[vars[i].first] = tuple[i];
    if (!cb(env)) return false;
  }
  return true;
}

} // namespace

bool exec_enabled_oracle(const TwoLevelSystem& sys, const FormulaPtr& pre,
                         const Transition& tau) {
  FiniteStructure base = exec_base(sys);
  bool enabled = false;
  enumerate_exec_states(sys, base, [&](FiniteStructure& m) {
    if (!rules_hold(m, sys.sig, sys.pm.rules, sys.substrate.id_sort, false)) return true;
    auto p = m.eval(pre);
    if (!p || !*p) return true;
    enumerate_witnesses(sys, tau, m, [&](const Env& w) {
      auto g = m.eval(tau.guard, w);
      if (g && *g) {
        enabled = true;
        return false;
      }
      return true;
    });
    return !enabled;
  });
  return enabled;
}

bool exec_triple_valid_oracle(const TwoLevelSystem& sys, const FormulaPtr& pre,
                              const Transition& tau, const FormulaPtr& post) {
  const Signature& sig = sys.sig;
  FiniteStructure base = exec_base(sys);
  bool counterexample = false;
  FormulaPtr post_primed = primed_copy(sig, post);
  enumerate_exec_states(sys, base, [&](FiniteStructure& m) {
    // the policy tables constrain the pre-state reading of the rules
    if (!rules_hold(m, sig, sys.pm.rules, sys.substrate.id_sort, false)) return true;
    auto p = m.eval(pre);
    if (!p || !*p) return true;
    enumerate_witnesses(sys, tau, m, [&](const Env& w) {
      auto g = m.eval(tau.guard, w);
      if (!g || !*g) return true;
      apply_transition(m, sig, tau, w);
      // the same policy tables must satisfy the rules in the post state
      if (!rules_hold(m, sig, sys.pm.rules, sys.substrate.id_sort, true)) return true;
      auto q = m.eval(post_primed, w);
      if (q && !*q) {
        counterexample = true;
        return false;
      }
      return true;
    });
    return !counterexample;
  });
  return !counterexample;
}

// ---- invariant toys ----

namespace {

// base structure for a relational system over a domain of n elements with
// one assignment of the declared Id constants
FiniteStructure inv_base(const TwoLevelSystem& sys, int n,
                         const std::vector<FunId>& consts, const std::vector<int>& vals) {
  const Signature& sig = sys.sig;
  FiniteStructure m;
  m.domains.resize(sig.num_sorts());
  auto& dom = m.domains[static_cast<size_t>(sys.substrate.id_sort)];
  for (int i = 0; i < n; ++i) dom.push_back("e" + std::to_string(i));
  for (size_t i = 0; i < consts.size(); ++i) m.funcs[{consts[i], false}][{}] = vals[i];
  return m;
}

std::vector<FunId> id_constants(const TwoLevelSystem& sys) {
  std::vector<FunId> out;
  for (size_t i = 0; i < sys.sig.num_funs(); ++i) {
    const FunDecl& d = sys.sig.fun(static_cast<FunId>(i));
    if (d.args.empty() && d.result == sys.substrate.id_sort) out.push_back(static_cast<FunId>(i));
  }
  return out;
}

// every (domain size, constant assignment, tables) combination
bool enumerate_inv_models(const TwoLevelSystem& sys, int max_domain,
                          const std::function<bool(FiniteStructure&)>& cb) {
  std::vector<FunId> consts = id_constants(sys);
  for (int n = 1; n <= max_domain; ++n) {
    std::vector<int> sizes(consts.size(), n);
    auto assignments = all_tuples(sizes);
    if (consts.empty()) assignments.push_back({});
    for (const auto& vals : assignments) {
      FiniteStructure m = inv_base(sys, n, consts, vals);
      ToyShape sh = shape_of(sys);
      std::vector<PredId> all = sh.state_preds;
      all.insert(all.end(), sh.pm_preds.begin(), sh.pm_preds.end());
      if (!enumerate_tables(m, sys.sig, all, 0, cb)) return false;
    }
  }
  return true;
}

// initial tables from the Eq-(1) definitions; nullopt when the model's
// constant assignment cannot satisfy the init (wf part false)
bool init_matches(const TwoLevelSystem& sys, FiniteStructure& m) {
  const Signature& sig = sys.sig;
  // quantified init ids: toys use none
  if (!sys.init.id_vars.empty()) throw SpecError("oracle: init ids unsupported in toys");
  auto wf = m.eval(sys.init.wf_part);
  if (!wf || !*wf) return false;
  for (const auto& def : sys.init.pm_defs) {
    std::vector<int> sizes;
    for (const auto& [pn, ps] : def.params) {
      (void)pn;
      sizes.push_back(m.domain_size(ps));
    }
    std::set<std::vector<int>> expect;
    for (const auto& tuple : all_tuples(sizes)) {
      Env env;
      for (size_t i = 0; i < def.params.size(); ++i) env[def.params[i].first] = tuple[i];
      auto v = m.eval(def.def, env);
      if (!v) throw SpecError("oracle: init definition not evaluable");
      if (*v) expect.insert(tuple);
    }
    auto it = m.preds.find({def.pred, false});
    std::set<std::vector<int>> got = it == m.preds.end() ? std::set<std::vector<int>>{} : it->second;
    if (got != expect) return false;
  }
  return true;
}

} // namespace

bool inv_I1_holds_oracle(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                         int max_domain) {
  bool violated = false;
  enumerate_inv_models(sys, max_domain, [&](FiniteStructure& m) {
    if (!rules_hold(m, sys.sig, sys.pm.rules, sys.substrate.id_sort, false)) return true;
    if (!init_matches(sys, m)) return true;
    auto v = m.eval(candidate);
    if (v && !*v) {
      violated = true;
      return false;
    }
    return true;
  });
  return !violated;
}

bool inv_I2_holds_oracle(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                         const FormulaPtr& target, int max_domain) {
  bool violated = false;
  enumerate_inv_models(sys, max_domain, [&](FiniteStructure& m) {
    if (!rules_hold(m, sys.sig, sys.pm.rules, sys.substrate.id_sort, false)) return true;
    auto c = m.eval(candidate);
    if (!c || !*c) return true;
    auto t = m.eval(target);
    if (t && !*t) {
      violated = true;
      return false;
    }
    return true;
  });
  return !violated;
}

bool inv_I3_holds_oracle(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                         const Transition& tau, int max_domain) {
  const Signature& sig = sys.sig;
  bool violated = false;
  FormulaPtr cand_primed = primed_copy(sig, candidate);
  enumerate_inv_models(sys, max_domain, [&](FiniteStructure& m) {
    if (!rules_hold(m, sig, sys.pm.rules, sys.substrate.id_sort, false)) return true;
    auto c = m.eval(candidate);
    if (!c || !*c) return true;
    enumerate_witnesses(sys, tau, m, [&](const Env& w) {
      auto g = m.eval(tau.guard, w);
      if (!g || !*g) return true;
      apply_transition(m, sig, tau, w);
      if (!rules_hold(m, sig, sys.pm.rules, sys.substrate.id_sort, true)) return true;
      auto q = m.eval(cand_primed, w);
      if (q && !*q) {
        violated = true;
        return false;
      }
      return true;
    });
    return !violated;
  });
  return !violated;
}

} // namespace soverify::testing
