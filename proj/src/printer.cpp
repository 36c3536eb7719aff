#include "soverify/printer.hpp"

#include <sstream>

#include "soverify/system.hpp"

namespace soverify {

std::string print_term(const Signature& sig, const TermPtr& t) {
  if (t->kind == Term::Kind::Var) return t->var_name;
  std::string head = sig.fun(t->fun).name + (t->primed ? "'" : "");
  if (t->args.empty()) return head;
  std::string s = "(" + head;
  for (const auto& a : t->args) s += " " + print_term(sig, a);
  return s + ")";
}

// "(x S) (y T)" without outer parentheses
static std::string binder_list(const std::vector<std::pair<std::string, SortId>>& bs,
                               const Signature& sig) {
  std::string s;
  for (size_t i = 0; i < bs.size(); ++i) {
    if (i) s += " ";
    s += "(" + bs[i].first + " " + sig.sort(bs[i].second).name + ")";
  }
  return s;
}

static std::string print_binders(const std::vector<std::pair<std::string, SortId>>& bs,
                                 const Signature& sig) {
  return "(" + binder_list(bs, sig) + ")";
}

std::string print_formula(const Signature& sig, const FormulaPtr& f) {
  switch (f->kind) {
    case Conn::True: return "true";
    case Conn::False: return "false";
    case Conn::Atom: {
      std::string s = "(" + sig.pred(f->pred).name + (f->primed ? "'" : "");
      for (const auto& t : f->terms) s += " " + print_term(sig, t);
      return s + ")";
    }
    case Conn::Eq:
      return "(= " + print_term(sig, f->terms[0]) + " " + print_term(sig, f->terms[1]) + ")";
    case Conn::Not:
      return "(not " + print_formula(sig, f->kids[0]) + ")";
    case Conn::And:
    case Conn::Or: {
      std::string s = f->kind == Conn::And ? "(and" : "(or";
      for (const auto& k : f->kids) s += " " + print_formula(sig, k);
      return s + ")";
    }
    case Conn::Implies:
      return "(implies " + print_formula(sig, f->kids[0]) + " " +
             print_formula(sig, f->kids[1]) + ")";
    case Conn::Iff:
      return "(iff " + print_formula(sig, f->kids[0]) + " " +
             print_formula(sig, f->kids[1]) + ")";
    case Conn::Forall:
    case Conn::Exists:
      return std::string(f->kind == Conn::Forall ? "(forall " : "(exists ") +
             print_binders(f->binders, sig) + " " + print_formula(sig, f->kids[0]) + ")";
  }
  return "?";
}

static void print_update(std::ostringstream& os, const Signature& sig,
                         const PredicateUpdate& u, const char* keyword) {
  os << "    (" << keyword << " " << sig.pred(u.pred).name << " "
     << print_binders(u.params, sig) << " " << print_formula(sig, u.def) << ")\n";
}

std::string print_system(const TwoLevelSystem& sys) {
  const Signature& sig = sys.sig;
  std::ostringstream os;
  os << "(system " << sys.name << "\n";

  os << "  (substrate\n";
  if (sys.substrate.equivalence)
    os << "    (equivalence " << sig.sort(sys.substrate.id_sort).name << ")\n";
  for (SortId s : sys.substrate.edt_sorts) {
    os << "    (edt " << sig.sort(s).name << " (";
    const auto& dom = sig.edt_domain(s);
    for (size_t i = 0; i < dom.size(); ++i) os << (i ? " " : "") << sig.fun(dom[i]).name;
    os << "))\n";
  }
  for (size_t i = 0; i < sig.num_funs(); ++i) {
    const auto& d = sig.fun(static_cast<FunId>(i));
    if (d.level == Level::Substrate && !d.is_edt_constant && d.args.empty())
      os << "    (const " << d.name << " " << sig.sort(d.result).name << ")\n";
  }
  os << "  )\n";

  auto print_level = [&](Level level, const char* block) {
    os << "  (" << block << "\n";
    for (size_t i = 0; i < sig.num_sorts(); ++i) {
      const auto& d = sig.sort(static_cast<SortId>(i));
      if (d.level != level) continue;
      if (d.enumerated) {
        os << "    (edt " << d.name << " (";
        for (size_t j = 0; j < d.edt_constants.size(); ++j)
          os << (j ? " " : "") << sig.fun(d.edt_constants[j]).name;
        os << "))\n";
      } else {
        os << "    (sort " << d.name << ")\n";
      }
    }
    for (size_t i = 0; i < sig.num_funs(); ++i) {
      const auto& d = sig.fun(static_cast<FunId>(i));
      if (d.level != level || d.is_edt_constant) continue;
      if (d.args.empty()) {
        os << "    (const " << d.name << " " << sig.sort(d.result).name << ")\n";
      } else {
        os << "    (fun " << d.name << " (";
        for (size_t j = 0; j < d.args.size(); ++j)
          os << (j ? " " : "") << sig.sort(d.args[j]).name;
        os << ") " << sig.sort(d.result).name << ")\n";
      }
    }
    for (size_t i = 0; i < sig.num_preds(); ++i) {
      const auto& d = sig.pred(static_cast<PredId>(i));
      if (d.level != level) continue;
      os << "    (pred " << d.name << " (";
      for (size_t j = 0; j < d.args.size(); ++j)
        os << (j ? " " : "") << sig.sort(d.args[j]).name;
      os << "))\n";
    }
    if (level == Level::WF) {
      for (const auto& [name, ax] : sys.wf.axioms)
        os << "    (axiom " << name << " " << print_formula(sig, ax) << ")\n";
    }
    if (level == Level::PM) {
      if (sys.pm.mode == PmMode::Datalog)
        os << "    (mode datalog)\n";
      else
        os << "    (mode horn " << sys.pm.horn_depth << ")\n";
      for (const auto& r : sys.pm.rules) {
        os << "    (rule " << r.name << " " << print_formula(sig, r.head) << " (";
        for (size_t j = 0; j < r.body.size(); ++j)
          os << (j ? " " : "") << print_formula(sig, r.body[j]);
        os << "))\n";
      }
    }
    os << "  )\n";
  };
  print_level(Level::WF, "wf");
  print_level(Level::PM, "pm");

  os << "  (statevars";
  for (FunId x : sys.state_vars)
    os << " (" << sig.fun(x).name << " " << sig.sort(sig.fun(x).result).name << ")";
  os << ")\n";
  os << "  (statepreds";
  for (PredId p : sys.state_preds) {
    os << " (" << sig.pred(p).name << " (";
    const auto& d = sig.pred(p);
    for (size_t j = 0; j < d.args.size(); ++j) os << (j ? " " : "") << sig.sort(d.args[j]).name;
    os << "))";
  }
  os << ")\n";

  os << "  (init\n";
  os << "    (ids " << binder_list(sys.init.id_vars, sig) << ")\n";
  os << "    (wf " << print_formula(sig, sys.init.wf_part) << ")\n";
  for (const auto& u : sys.init.pm_defs) print_update(os, sig, u, "define");
  os << "  )\n";

  for (const auto& tr : sys.transitions) {
    os << "  (transition " << tr.name << "\n";
    os << "    (ids " << binder_list(tr.id_vars, sig) << ")\n";
    os << "    (vars " << binder_list(tr.data_vars, sig) << ")\n";
    os << "    (guard " << print_formula(sig, tr.guard) << ")\n";
    for (const auto& [x, t] : tr.wf_updates)
      os << "    (assign " << sig.fun(x).name << "' " << print_term(sig, t) << ")\n";
    for (const auto& u : tr.pm_updates) {
      os << "    (define " << sig.pred(u.pred).name << "' "
         << print_binders(u.params, sig) << " " << print_formula(sig, u.def) << ")\n";
    }
    os << "  )\n";
  }
  for (const auto& [name, f] : sys.named_formulas)
    os << "  (defformula " << name << " " << print_formula(sig, f) << ")\n";
  os << ")\n";
  return os.str();
}

std::string print_spec_file(const SpecFile& file) {
  std::ostringstream os;
  for (const auto& sys : file.systems) os << print_system(sys);
  for (const auto& sc : file.scenarios) {
    const TwoLevelSystem& sys = file.system_named(sc.system);
    os << "(scenario " << sc.name << " (system " << sc.system << ")\n";
    os << "  (state " << print_formula(sys.sig, sc.states[0]) << ")\n";
    for (size_t i = 0; i < sc.transitions.size(); ++i) {
      os << "  (step " << sc.transitions[i] << " "
         << print_formula(sys.sig, sc.states[i + 1]) << ")\n";
    }
    os << ")\n";
  }
  for (const auto& iv : file.invariants) {
    const TwoLevelSystem& sys = file.system_named(iv.system);
    os << "(invariant " << iv.name << " (system " << iv.system << ")\n";
    os << "  (target " << print_formula(sys.sig, iv.target) << ")\n";
    if (!equal(iv.candidate, iv.target))
      os << "  (candidate " << print_formula(sys.sig, iv.candidate) << ")\n";
    os << ")\n";
  }
  return os.str();
}

} // namespace soverify
