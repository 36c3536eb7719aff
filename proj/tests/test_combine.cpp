#include <doctest.h>

#include "soverify/combine.hpp"
#include "soverify/printer.hpp"
#include "support/joint_oracle.hpp"
#include "support/test_util.hpp"

using namespace soverify;
using soverify::testing::fml;
using soverify::testing::JointOracleFixture;

TEST_CASE("purify splits mixed atoms and stays equisatisfiable") {
  auto fx = JointOracleFixture::make();
  Signature sig = fx.sys.sig;

  // p over a WF term: fr(a0) is alien inside the Role-typed position? p is
  // Id-typed, so use an equality that mixes instead
  auto mixed = fml(fx.sys, "(and (p a0) (= (fr a0) rr) (mem m0 (ins m0 s0)))");
  PurifiedQuery q = purify(sig, mixed);
  for (const auto& a : collect_atoms(q.formula)) {
    CHECK_NOTHROW(atom_home(sig, a));
  }
  // already-pure formula: unchanged, no fresh constants
  Signature sig2 = fx.sys.sig;
  auto pure = fml(fx.sys, "(= a0 c1)");
  PurifiedQuery q2 = purify(sig2, pure);
  CHECK(q2.origin.empty());
  CHECK(equal(q2.formula, pure));
  CHECK(q2.shared.size() == 1);  // a0 itself is a shared constant
}

TEST_CASE("purification names alien subterms inside PM atoms") {
  // a state predicate over a WF document term
  auto sys = soverify::testing::parse_system(R"(
(system carmini
  (substrate (edt Id (Ed Helen)))
  (wf (sort Doc) (fun wrap (Doc) Doc) (const req Doc))
  (pm (mode datalog))
  (statevars)
  (statepreds (dbdoc (Doc)))
  (init (ids) (wf true) (define dbdoc ((z Doc)) false))
)
)");
  Signature sig = sys.sig;
  auto f = fml(sys, "(dbdoc (wrap req))");
  PurifiedQuery q = purify(sig, f);
  REQUIRE(q.origin.size() == 1);
  CHECK(print_term(sig, q.origin[0].second) == "(wrap req)");
  // the defining equality went to the WF side, the atom to the PM side
  bool saw_def = false, saw_atom = false;
  for (const auto& a : collect_atoms(q.formula)) {
    AtomHome h = atom_home(sig, a);
    if (a->kind == Conn::Eq) {
      CHECK(h == AtomHome::WF);
      saw_def = true;
    } else {
      CHECK(h == AtomHome::PM);
      saw_atom = true;
    }
  }
  CHECK(saw_def);
  CHECK(saw_atom);
}

TEST_CASE("tsoa_sat basic verdicts") {
  auto fx = JointOracleFixture::make();
  TheoryContext ctx = TheoryContext::for_system(fx.sys, SubstrateMode::Edt);

  CHECK(tsoa_sat(ctx, fml(fx.sys, "(= c1 c2)")).status == Status::Unsat);
  CHECK(tsoa_sat(ctx, fml(fx.sys, "(= a0 a1)")).status == Status::Sat);
  CHECK(tsoa_sat(ctx, fml(fx.sys, "(mem m0 mty)")).status == Status::Unsat);
  CHECK(tsoa_sat(ctx, fml(fx.sys, "(not (mem m0 (ins m0 s0)))")).status == Status::Unsat);

  // mixed: the policy rule fires across the interface
  auto v = tsoa_sat(ctx, fml(fx.sys, "(and (p a0) (p a1) (not (q a0 a1)))"));
  CHECK(v.status == Status::Unsat);
  auto w = tsoa_sat(ctx, fml(fx.sys, "(and (p a0) (not (q a0 a1)))"));
  CHECK(w.status == Status::Sat);

  // non-ground input is rejected
  SortId id = *fx.sys.sig.find_sort("Id");
  auto open = Formula::atom(fx.sys.sig, fx.p, {Term::var("x", id)});
  CHECK_THROWS_AS(tsoa_sat(ctx, open), SpecError);
}

TEST_CASE("tsoa_sat agrees with the joint finite-model oracle") {
  auto fx = JointOracleFixture::make();
  TheoryContext ctx = TheoryContext::for_system(fx.sys, SubstrateMode::Edt);
  const Signature& sig = fx.sys.sig;

  soverify::testing::Rng rng(20260808);
  int disagreements = 0;
  for (int seed = 0; seed < 120; ++seed) {
    bool use_sets = rng.flip();
    auto id_term = [&]() { return fx.id_consts[static_cast<size_t>(rng.below(5))]; };
    auto role_term = [&]() -> TermPtr {
      if (!use_sets && rng.below(2) == 0)
        return Term::app(sig, *sig.find_fun("fr"), {id_term()});
      return fx.role_consts[static_cast<size_t>(rng.below(3))];
    };
    auto msg_term = [&]() { return fx.msg_consts[static_cast<size_t>(rng.below(2))]; };
    std::function<TermPtr(int)> set_term = [&](int depth) -> TermPtr {
      if (depth == 0 || rng.below(2) == 0) return rng.flip() ? fx.s0 : fx.mty;
      return Term::app(sig, *sig.find_fun("ins"), {msg_term(), set_term(depth - 1)});
    };
    auto atom = [&]() -> FormulaPtr {
      int kind = rng.below(use_sets ? 6 : 4);
      switch (kind) {
        case 0: return Formula::eq(id_term(), id_term());
        case 1: return Formula::eq(role_term(), role_term());
        case 2: return Formula::atom(sig, fx.p, {id_term()});
        case 3: return Formula::atom(sig, fx.q, {id_term(), id_term()});
        case 4: return Formula::atom(sig, fx.mem, {msg_term(), set_term(2)});
        default: return Formula::eq(set_term(2), set_term(2));
      }
    };
    std::function<FormulaPtr(int)> gen = [&](int depth) -> FormulaPtr {
      if (depth == 0 || rng.below(3) == 0) return atom();
      switch (rng.below(4)) {
        case 0: return Formula::negate(gen(depth - 1));
        case 1: return Formula::conj({gen(depth - 1), gen(depth - 1)});
        case 2: return Formula::disj({gen(depth - 1), gen(depth - 1)});
        default: return Formula::implies(gen(depth - 1), gen(depth - 1));
      }
    };
    FormulaPtr f = gen(2 + rng.below(2));

    Verdict v = tsoa_sat(ctx, f);
    REQUIRE(v.status != Status::Unsupported);
    bool oracle = joint_oracle_satisfiable(fx, f);
    if ((v.status == Status::Sat) != oracle) {
      ++disagreements;
      MESSAGE("disagreement on seed ", seed, ": ", print_formula(sig, f), " solver=",
              (v.status == Status::Sat ? "sat" : "unsat"), " oracle=", oracle);
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("tsoa_sat_universal handles the forall-Id fragment") {
  auto sys = soverify::testing::parse_system(R"(
(system equivsys
  (substrate (equivalence Id) (const e1 Id) (const e2 Id))
  (wf)
  (pm (mode datalog)
    (pred guard (Id))
    (rule G (guard X) ((able X)))
  )
  (statevars)
  (statepreds (able (Id)))
  (init (ids) (wf true) (define able ((z Id)) false))
)
)");
  TheoryContext ctx = TheoryContext::for_system(sys, SubstrateMode::Equiv);
  SortId id = *sys.sig.find_sort("Id");

  // forall i. i = i is satisfiable
  auto refl = Formula::forall({{"i", id}}, Formula::eq(Term::var("i", id), Term::var("i", id)));
  CHECK(tsoa_sat_universal(ctx, refl).status == Status::Sat);

  // forall i. i = e1, with e1 != e2: instantiating i with e2 conflicts
  auto e1 = Term::constant(sys.sig, *sys.sig.find_fun("e1"));
  auto e2 = Term::constant(sys.sig, *sys.sig.find_fun("e2"));
  auto all_eq = Formula::conj(
      {Formula::forall({{"i", id}}, Formula::eq(Term::var("i", id), e1)),
       Formula::negate(Formula::eq(e1, e2))});
  CHECK(tsoa_sat_universal(ctx, all_eq).status == Status::Unsat);
  // without the disequality it collapses to a one-class model
  auto all_eq2 = Formula::forall({{"i", id}}, Formula::eq(Term::var("i", id), e1));
  CHECK(tsoa_sat_universal(ctx, all_eq2).status == Status::Sat);

  // fragment violations produce Unsupported with the right codes
  auto ex = Formula::exists({{"i", id}}, Formula::eq(Term::var("i", id), e1));
  auto vex = tsoa_sat_universal(ctx, ex);
  CHECK(vex.status == Status::Unsupported);
  CHECK(vex.reason_code == "EXISTENTIAL_QUANTIFIER");
}

TEST_CASE("trace mode reports loop iterations") {
  auto fx = JointOracleFixture::make();
  TheoryContext ctx = TheoryContext::for_system(fx.sys, SubstrateMode::Edt);
  std::vector<TraceEvent> events;
  auto v = tsoa_sat(ctx, fml(fx.sys, "(and (p a0) (p a1) (not (q a0 a1)))"),
                    [&](const TraceEvent& e) { events.push_back(e); });
  CHECK(v.status == Status::Unsat);
  CHECK(!events.empty());
  bool some_learned = false;
  for (const auto& e : events) some_learned |= !e.learned.empty();
  CHECK(some_learned);
}
