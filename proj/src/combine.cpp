#include "soverify/combine.hpp"

#include <algorithm>
#include <cassert>

#include "soverify/printer.hpp"
#include "soverify/transform.hpp"

namespace soverify {

TheoryContext TheoryContext::for_system(const TwoLevelSystem& sys, SubstrateMode mode) {
  TheoryContext ctx;
  ctx.sig = sys.sig;
  ctx.wf_axioms = sys.wf.axioms;
  ctx.pm_rules = sys.pm.rules;
  ctx.pm_mode = sys.pm.mode;
  ctx.horn_depth = sys.pm.horn_depth;
  ctx.mode = mode;
  ctx.id_sort = sys.substrate.id_sort;
  return ctx;
}

namespace {

enum class TermHome : uint8_t { Shared, WF, PM, Mixed };

TermHome level_home(Level lv) {
  switch (lv) {
    case Level::Substrate: return TermHome::Shared;
    case Level::WF:
    case Level::StateVar: return TermHome::WF;
    case Level::PM:
    case Level::StatePred: return TermHome::PM;
  }
  return TermHome::Mixed;
}

TermHome join_home(TermHome a, TermHome b) {
  if (a == TermHome::Shared) return b;
  if (b == TermHome::Shared) return a;
  return a == b ? a : TermHome::Mixed;
}

TermHome term_home(const Signature& sig, const TermPtr& t) {
  TermHome h = level_home(sig.fun(t->fun).level);
  for (const auto& a : t->args) h = join_home(h, term_home(sig, a));
  return h;
}

} // namespace

AtomHome atom_home(const Signature& sig, const FormulaPtr& atom) {
  if (atom->kind == Conn::Atom) {
    Level plv = sig.pred(atom->pred).level;
    TermHome h = level_home(plv);
    for (const auto& t : atom->terms) h = join_home(h, term_home(sig, t));
    switch (h) {
      case TermHome::Shared:
        return (plv == Level::StatePred || plv == Level::PM) ? AtomHome::PM : AtomHome::WF;
      case TermHome::WF: return AtomHome::WF;
      case TermHome::PM: return AtomHome::PM;
      case TermHome::Mixed: throw SpecError("mixed-theory atom survived purification");
    }
  }
  if (atom->kind == Conn::Eq) {
    TermHome h = join_home(term_home(sig, atom->terms[0]), term_home(sig, atom->terms[1]));
    switch (h) {
      case TermHome::Shared: return AtomHome::Both;
      case TermHome::WF: return AtomHome::WF;
      case TermHome::PM: return AtomHome::PM;
      case TermHome::Mixed: throw SpecError("mixed-theory equality survived purification");
    }
  }
  throw SpecError("atom_home: not an atom");
}

// ---- purification ----

namespace {

struct Purifier {
  Signature& sig;
  std::vector<std::pair<TermPtr, TermPtr>> defs;  // shared constant = subterm
  std::vector<std::pair<std::string, TermPtr>> origin;
  int counter = 0;

  TermPtr name_subterm(const TermPtr& t) {
    for (const auto& [c, sub] : defs)
      if (equal(sub, t)) return c;
    FunId c =
        sig.add_fresh_constant("a!" + std::to_string(++counter), t->sort, Level::Substrate);
    TermPtr ct = Term::constant(sig, c);
    defs.emplace_back(ct, t);
    origin.emplace_back(sig.fun(c).name, t);
    return ct;
  }

  // rebuilds t so that every symbol in it is compatible with `home`
  TermPtr pure_term(const TermPtr& t, TermHome home) {
    TermHome th = level_home(sig.fun(t->fun).level);
    if (th != TermHome::Shared && th != home) return name_subterm(t);
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(pure_term(a, home));
    return Term::app(sig, t->fun, std::move(args), t->primed);
  }

  FormulaPtr pure_atom(const FormulaPtr& atom) {
    if (atom->kind == Conn::Atom) {
      TermHome home = level_home(sig.pred(atom->pred).level);
      std::vector<TermPtr> args;
      for (const auto& t : atom->terms) args.push_back(pure_term(t, home));
      return Formula::atom(sig, atom->pred, std::move(args), atom->primed);
    }
    // equality: purify toward the first non-shared side's home
    TermHome lh = term_home(sig, atom->terms[0]);
    TermHome rh = term_home(sig, atom->terms[1]);
    TermHome home = lh != TermHome::Shared ? lh : rh;
    if (home == TermHome::Shared) return atom;  // substrate-only equality
    if (home == TermHome::Mixed)
      home = level_home(sig.fun(atom->terms[0]->fun).level);
    if (home == TermHome::Shared)
      home = level_home(sig.fun(atom->terms[1]->fun).level);
    return Formula::eq(pure_term(atom->terms[0], home), pure_term(atom->terms[1], home));
  }

  FormulaPtr walk(const FormulaPtr& f) {
    switch (f->kind) {
      case Conn::True:
      case Conn::False:
        return f;
      case Conn::Atom:
      case Conn::Eq:
        return pure_atom(f);
      case Conn::Not:
        return Formula::negate(walk(f->kids[0]));
      case Conn::And:
      case Conn::Or: {
        std::vector<FormulaPtr> kids;
        for (const auto& k : f->kids) kids.push_back(walk(k));
        return f->kind == Conn::And ? Formula::conj(std::move(kids))
                                    : Formula::disj(std::move(kids));
      }
      case Conn::Implies:
        return Formula::implies(walk(f->kids[0]), walk(f->kids[1]));
      case Conn::Iff:
        return Formula::iff(walk(f->kids[0]), walk(f->kids[1]));
      case Conn::Forall:
      case Conn::Exists:
        throw SpecError("purify: input must be ground");
    }
    throw SpecError("unreachable");
  }
};

} // namespace

PurifiedQuery purify(Signature& sig, const FormulaPtr& f) {
  if (!is_ground(f)) throw SpecError("purify: input must be ground");
  Purifier p{sig, {}, {}, 0};
  FormulaPtr skeleton = p.walk(f);
  // defining equalities, each purified toward its subterm's home. Naming a
  // nested alien inside a definition appends to defs, so index a worklist.
  std::vector<FormulaPtr> parts{skeleton};
  for (size_t i = 0; i < p.defs.size(); ++i) {
    auto [c, sub] = p.defs[i];
    TermHome home = level_home(sig.fun(sub->fun).level);
    TermPtr rhs = p.pure_term(sub, home);
    parts.push_back(Formula::eq(c, rhs));
  }
  PurifiedQuery q;
  q.formula = Formula::conj(std::move(parts));
  q.origin = std::move(p.origin);
  // shared constants: every substrate-level constant of the result that is
  // not an EDT domain constant (purification names, Skolem and declared
  // Id constants alike)
  std::vector<TermPtr> shared;
  for (const auto& t : collect_subterms(q.formula)) {
    if (t->kind != Term::Kind::App || !t->args.empty()) continue;
    const FunDecl& d = sig.fun(t->fun);
    if (d.level != Level::Substrate || d.is_edt_constant) continue;
    bool dup = false;
    for (const auto& u : shared) dup |= equal(u, t);
    if (!dup) shared.push_back(t);
  }
  q.shared = std::move(shared);
  // purity check on every atom
  for (const auto& a : collect_atoms(q.formula)) atom_home(sig, a);
  return q;
}

// ---- the combination loop ----

namespace {

struct InterfaceAtoms {
  std::vector<int> ie;      // substrate arrangement atoms
  std::vector<int> bridge;  // other shared-constant equalities
};

InterfaceAtoms build_interface_atoms(const Signature& sig, SubstrateMode mode, SortId id_sort,
                                     const std::vector<TermPtr>& shared, AtomTable& atoms) {
  InterfaceAtoms out;
  std::map<SortId, std::vector<TermPtr>> by_sort;
  for (const auto& t : shared) by_sort[t->sort].push_back(t);
  for (const auto& [s, consts] : by_sort) {
    const SortDecl& sd = sig.sort(s);
    if (sd.enumerated) {
      // arrangement against the EDT constants
      for (const auto& a : consts) {
        for (FunId c : sd.edt_constants) {
          int idx = atoms.intern(Formula::eq(a, Term::constant(sig, c)));
          if (mode == SubstrateMode::Edt && sd.level == Level::Substrate)
            out.ie.push_back(idx);
          else
            out.bridge.push_back(idx);
        }
      }
    } else {
      // pairwise arrangement
      for (size_t i = 0; i < consts.size(); ++i)
        for (size_t j = i + 1; j < consts.size(); ++j) {
          int idx = atoms.intern(Formula::eq(consts[i], consts[j]));
          if (mode == SubstrateMode::Equiv && s == id_sort)
            out.ie.push_back(idx);
          else
            out.bridge.push_back(idx);
        }
    }
  }
  // mode separation, asserted structurally (equalities are stored in a
  // canonical orientation, so check both sides)
  for (int idx : out.ie) {
    const FormulaPtr& a = atoms.at(idx);
    auto is_edt = [&](const TermPtr& t) {
      return t->kind == Term::Kind::App && t->args.empty() && sig.fun(t->fun).is_edt_constant;
    };
    bool one_side_edt = is_edt(a->terms[0]) != is_edt(a->terms[1]);
    if (mode == SubstrateMode::Edt && !one_side_edt)
      throw SpecError("internal: edt-mode IE atom is not against an EDT constant");
    if (mode == SubstrateMode::Equiv &&
        (is_edt(a->terms[0]) || is_edt(a->terms[1]) || a->terms[0]->sort != id_sort))
      throw SpecError("internal: equiv-mode IE atom is not an Id pair");
  }
  return out;
}

// the guessed arrangement must be consistent as an equality graph before
// dispatch: domain clauses for enumerated sorts, transitivity for pairs
void seed_arrangement_clauses(const Signature& sig, const std::vector<TermPtr>& shared,
                              AtomTable& atoms, CnfBuilder& cnf) {
  std::map<SortId, std::vector<TermPtr>> by_sort;
  for (const auto& t : shared) by_sort[t->sort].push_back(t);
  for (const auto& [s, consts] : by_sort) {
    const SortDecl& sd = sig.sort(s);
    if (sd.enumerated) {
      for (const auto& a : consts) {
        Clause at_least;
        std::vector<int> idxs;
        for (FunId c : sd.edt_constants) {
          int idx = atoms.intern(Formula::eq(a, Term::constant(sig, c)));
          at_least.push_back(pos(idx));
          idxs.push_back(idx);
        }
        cnf.add_clause(std::move(at_least));
        for (size_t i = 0; i < idxs.size(); ++i)
          for (size_t j = i + 1; j < idxs.size(); ++j)
            cnf.add_clause({neg(idxs[i]), neg(idxs[j])});
      }
    } else {
      auto pair_idx = [&](size_t i, size_t j) {
        return atoms.intern(Formula::eq(consts[std::min(i, j)], consts[std::max(i, j)]));
      };
      for (size_t i = 0; i < consts.size(); ++i)
        for (size_t j = i + 1; j < consts.size(); ++j)
          for (size_t k = j + 1; k < consts.size(); ++k) {
            int ij = pair_idx(i, j), jk = pair_idx(j, k), ik = pair_idx(i, k);
            cnf.add_clause({neg(ij), neg(jk), pos(ik)});
            cnf.add_clause({neg(ij), neg(ik), pos(jk)});
            cnf.add_clause({neg(jk), neg(ik), pos(ij)});
          }
    }
  }
}

} // namespace

Verdict tsoa_sat(const TheoryContext& ctx, const FormulaPtr& f, TraceSink trace) {
  if (!is_ground(f))
    throw SpecError("tsoa_sat: input is not ground; instantiate or skolemize first");

  Signature sig = ctx.sig;
  PurifiedQuery q = purify(sig, f);

  AtomTable atoms;
  CnfBuilder cnf(atoms);
  cnf.assert_formula(q.formula);
  InterfaceAtoms iface = build_interface_atoms(sig, ctx.mode, ctx.id_sort, q.shared, atoms);
  seed_arrangement_clauses(sig, q.shared, atoms, cnf);
  int num_vars = cnf.finalize();

  std::vector<AtomHome> homes;
  std::vector<bool> is_interface(static_cast<size_t>(atoms.size()), false);
  for (int i : iface.ie) is_interface[static_cast<size_t>(i)] = true;
  for (int i : iface.bridge) is_interface[static_cast<size_t>(i)] = true;
  for (int i = 0; i < atoms.size(); ++i) homes.push_back(atom_home(sig, atoms.at(i)));

  PmQueryOptions pm_opts;
  pm_opts.mode = ctx.pm_mode;
  pm_opts.horn_depth = ctx.horn_depth;
  {
    auto add = [&](const TermPtr& t) {
      auto& v = pm_opts.universe[t->sort];
      for (const auto& u : v)
        if (equal(u, t)) return;
      v.push_back(t);
    };
    for (size_t s = 0; s < sig.num_sorts(); ++s)
      for (FunId c : sig.sort(static_cast<SortId>(s)).edt_constants)
        add(Term::constant(sig, c));
    for (const auto& t : collect_subterms(q.formula))
      if (t->kind == Term::Kind::App && t->args.empty()) add(t);
  }

  // the WF engine instantiates once against the full atom universe; its
  // lemmas persist across loop iterations
  std::vector<FormulaPtr> wf_universe;
  for (int i = 0; i < atoms.size(); ++i) {
    if (is_interface[static_cast<size_t>(i)] || homes[static_cast<size_t>(i)] != AtomHome::PM)
      wf_universe.push_back(atoms.at(i));
  }
  WfSolver wf_solver(sig, ctx.wf_axioms, wf_universe);

  BoolEnumerator en(num_vars, cnf.clauses());
  int iteration = 0;
  while (auto assignment = en.next()) {
    ++iteration;
    std::vector<FormulaPtr> wf_lits, pm_lits;
    TraceEvent ev;
    ev.iteration = iteration;
    for (int i = 0; i < atoms.size(); ++i) {
      bool value = (*assignment)[static_cast<size_t>(i)];
      FormulaPtr lit = value ? atoms.at(i) : Formula::negate(atoms.at(i));
      AtomHome home = homes[static_cast<size_t>(i)];
      bool iface_atom = is_interface[static_cast<size_t>(i)];
      if (iface_atom || home != AtomHome::PM) wf_lits.push_back(lit);
      if (iface_atom || home != AtomHome::WF) pm_lits.push_back(lit);
      if (trace && value) ev.assignment.push_back(print_formula(sig, atoms.at(i)));
    }

    Verdict wf = wf_solver.solve(wf_lits);
    Verdict pm = pm_theory_sat(sig, ctx.pm_rules, pm_lits, pm_opts);
    ev.wf = wf.status;
    ev.pm = pm.status;
    if (wf.status == Status::Unsupported) {
      wf.reason = "WF theory: " + wf.reason;
      return wf;
    }
    if (pm.status == Status::Unsupported) {
      pm.reason = "PM theory: " + pm.reason;
      return pm;
    }
    if (wf.status == Status::Sat && pm.status == Status::Sat) {
      if (trace) trace(ev);
      // merged model over the union of both slices; the arrangement is
      // total over the shared constants, so the quotients agree on a-bar
      std::vector<FormulaPtr> all_lits = wf_lits;
      for (const auto& l : pm_lits) {
        bool dup = false;
        for (const auto& w : all_lits) dup |= equal(w, l);
        if (!dup) all_lits.push_back(l);
      }
      CongruenceSolver cc(sig);
      if (!cc.assert_literals(all_lits))
        throw SpecError("internal: theory models disagree on the shared constants");
      FiniteStructure model = cc.build_model();
      if (!model.satisfies_literals(all_lits))
        throw SpecError("internal: merged model fails an input literal");
      return Verdict::sat(std::move(model));
    }
    auto learn_from = [&](const Verdict& v) {
      if (v.status != Status::Unsat) return;
      Clause learned;
      for (const auto& lit : v.core) {
        auto [atom, positive] = literal_parts(lit);
        auto idx = atoms.find(atom);
        if (!idx) throw SpecError("internal: conflict literal is not a registered atom");
        learned.push_back(positive ? neg(*idx) : pos(*idx));
        if (trace) ev.learned.push_back(print_formula(sig, lit));
      }
      // progress: the clause must rule out the current assignment
      for (Lit l : learned) {
        if ((*assignment)[static_cast<size_t>(var_of(l))] == sign_of(l))
          throw SpecError("internal: learned clause does not prune the assignment");
      }
      en.learn(std::move(learned));
    };
    learn_from(wf);
    learn_from(pm);
    if (trace) trace(ev);
  }
  return Verdict::unsat();
}

std::optional<Verdict> check_forall_id_fragment(const Signature& sig, const FormulaPtr& f,
                                                SortId id_sort) {
  // existentials are diagnosed first: they are what typically pushes a
  // property out of the fragment
  std::function<bool(const FormulaPtr&)> has_exists = [&](const FormulaPtr& g) {
    if (g->kind == Conn::Exists) return true;
    for (const auto& k : g->kids)
      if (has_exists(k)) return true;
    return false;
  };
  if (has_exists(f))
    return Verdict::unsupported("EXISTENTIAL_QUANTIFIER",
                                "existential quantifier outside the forall-Id fragment");
  std::vector<FormulaPtr> parts =
      f->kind == Conn::And ? f->kids : std::vector<FormulaPtr>{f};
  for (const auto& part : parts) {
    if (is_quantifier_free(part)) continue;
    if (part->kind != Conn::Forall)
      return Verdict::unsupported("UNSUPPORTED_SHAPE",
                                  "universal quantifier nested under a connective");
    FormulaPtr body = part;
    while (body->kind == Conn::Forall) {
      for (const auto& [name, sort] : body->binders) {
        if (sort != id_sort)
          return Verdict::unsupported(
              "NON_ID_UNIVERSAL", "universal quantification over sort " +
                                      sig.sort(sort).name + " (variable " + name +
                                      ") is outside the forall-Id fragment");
      }
      body = body->kids[0];
    }
    if (!is_quantifier_free(body))
      return Verdict::unsupported("UNSUPPORTED_SHAPE",
                                  "matrix of a universal part is not quantifier-free");
  }
  return std::nullopt;
}

Verdict tsoa_sat_universal(const TheoryContext& ctx, const FormulaPtr& f, TraceSink trace) {
  if (auto bad = check_forall_id_fragment(ctx.sig, f, ctx.id_sort)) return *bad;

  if (is_quantifier_free(f)) return tsoa_sat(ctx, f, std::move(trace));

  // representatives: every Id-sorted constant of the formula, or one fresh
  std::vector<TermPtr> reps = collect_constants_of_sort(f, ctx.id_sort);
  TheoryContext extended = ctx;
  if (reps.empty()) {
    FunId fresh = extended.sig.add_fresh_constant("id!0", ctx.id_sort, Level::Substrate);
    reps.push_back(Term::constant(extended.sig, fresh));
  }
  std::vector<FormulaPtr> parts =
      f->kind == Conn::And ? f->kids : std::vector<FormulaPtr>{f};
  std::vector<FormulaPtr> grounded;
  for (const auto& part : parts)
    grounded.push_back(part->kind == Conn::Forall
                           ? ground_instantiate(extended.sig, part, reps, ctx.id_sort)
                           : part);
  return tsoa_sat(extended, Formula::conj(std::move(grounded)), std::move(trace));
}

} // namespace soverify
