#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "soverify/invcheck.hpp"
#include "soverify/parser.hpp"
#include "support/explicit_oracle.hpp"
#include "support/test_util.hpp"

using namespace soverify;

#ifndef SOVERIFY_SPEC_DIR
#define SOVERIFY_SPEC_DIR "specs"
#endif

namespace {

SpecFile load(const std::string& rel) {
  std::ifstream in(std::string(SOVERIFY_SPEC_DIR) + "/" + rel);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

int oracle_domain(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                  const Transition* tau) {
  // declared Id constants plus the Skolemized variables of the obligation
  int n = 0;
  for (size_t i = 0; i < sys.sig.num_funs(); ++i) {
    const FunDecl& d = sys.sig.fun(static_cast<FunId>(i));
    if (d.args.empty() && d.result == sys.substrate.id_sort) ++n;
  }
  FormulaPtr body = candidate;
  while (body->kind == Conn::Forall) {
    n += static_cast<int>(body->binders.size());
    body = body->kids[0];
  }
  if (tau) n += static_cast<int>(tau->id_vars.size() + tau->data_vars.size());
  return std::max(1, std::min(n, 4));
}

} // namespace

TEST_CASE("I2 with identical candidate and target discharges trivially") {
  SpecFile f = load("toys/toy_pair.sospec");
  const TwoLevelSystem& sys = f.systems[0];
  const InvariantTask& task = f.invariants[0];
  auto [i1, i2] = build_I1_I2(sys, task.candidate, task.target);
  Verdict v = tsoa_sat_universal(i2.query.ctx, i2.query.formula);
  CHECK(v.status == Status::Unsat);
}

TEST_CASE("preservation obligations have the two-part shape") {
  SpecFile f = load("toys/toy_lock.sospec");
  const TwoLevelSystem& sys = f.systems[0];
  const InvariantTask& task = f.invariants[0];
  for (const auto& tau : sys.transitions) {
    InvObligation ob = negate_preservation(sys, task.candidate, tau);
    REQUIRE(!ob.query.blocked);
    // conjunction of forall-Id parts and quantifier-free parts, prime-free
    CHECK(!contains_primed(ob.query.formula));
    bool has_forall = false, has_qf = false;
    std::vector<FormulaPtr> parts = ob.query.formula->kind == Conn::And
                                        ? ob.query.formula->kids
                                        : std::vector<FormulaPtr>{ob.query.formula};
    for (const auto& p : parts) {
      if (p->kind == Conn::Forall) has_forall = true;
      else if (is_quantifier_free(p)) has_qf = true;
      else FAIL("unexpected part shape");
    }
    CHECK(has_forall);
    CHECK(has_qf);
  }
}

TEST_CASE("a preservation matrix of 'true' discharges trivially") {
  SpecFile f = load("toys/toy_trivial.sospec");
  const TwoLevelSystem& sys = f.systems[0];
  SortId id = sys.substrate.id_sort;
  auto always = Formula::forall({{"i", id}}, Formula::tru());
  InvObligation ob = negate_preservation(sys, always, sys.transitions[0]);
  REQUIRE(!ob.query.blocked);
  Verdict v = tsoa_sat_universal(ob.query.ctx, ob.query.formula);
  CHECK(v.status == Status::Unsat);
}

TEST_CASE("invariant mode refuses EDT substrates") {
  SpecFile f = load("toys/toy_phase.sospec");
  const TwoLevelSystem& sys = f.systems[0];
  InvariantTask task;
  task.name = "bogus";
  task.system = sys.name;
  task.target = Formula::forall({{"i", sys.substrate.id_sort}}, Formula::tru());
  task.candidate = task.target;
  InvariantReport rep = check_inductive(sys, task);
  CHECK(rep.verdict == "unsupported");
  REQUIRE(!rep.diagnostics.empty());
  CHECK(rep.diagnostics[0].code == "NOT_EQUIV_SUBSTRATE");
}

TEST_CASE("invariant toys agree with the explicit-state oracle") {
  int obligations = 0;
  for (const char* file :
       {"toys/toy_lock.sospec", "toys/toy_trivial.sospec", "toys/toy_pair.sospec",
        "toys/toy_implies.sospec", "toys/toy_guarded_inv.sospec", "toys/toy_frame.sospec"}) {
    SpecFile f = load(file);
    const TwoLevelSystem& sys = f.systems[0];
    for (const auto& task : f.invariants) {
      CAPTURE(file);
      CAPTURE(task.name);
      InvariantReport rep = check_inductive(sys, task);
      REQUIRE(rep.verdict != "unsupported");
      for (const auto& ob : rep.obligations) {
        bool engine_holds = ob.verdict == "holds";
        bool oracle_holds = false;
        if (ob.kind == "I1") {
          oracle_holds = soverify::testing::inv_I1_holds_oracle(
              sys, task.candidate, oracle_domain(sys, task.candidate, nullptr));
        } else if (ob.kind == "I2") {
          oracle_holds = soverify::testing::inv_I2_holds_oracle(
              sys, task.candidate, task.target, oracle_domain(sys, task.candidate, nullptr));
        } else {
          const Transition& tau = *sys.find_transition(ob.transition);
          oracle_holds = soverify::testing::inv_I3_holds_oracle(
              sys, task.candidate, tau, oracle_domain(sys, task.candidate, &tau));
        }
        CAPTURE(ob.kind);
        CAPTURE(ob.transition);
        CHECK(engine_holds == oracle_holds);
        ++obligations;
      }
    }
  }
  CHECK(obligations >= 20);
}

TEST_CASE("established invariants hold along simulated runs") {
  // soundness spot-check: simulate the lock toy explicitly over a 2-element
  // domain and confirm every reached state satisfies the target
  SpecFile f = load("toys/toy_lock.sospec");
  const TwoLevelSystem& sys = f.systems[0];
  const InvariantTask& task = f.invariants[0];
  InvariantReport rep = check_inductive(sys, task);
  REQUIRE(rep.verdict == "established");

  // explicit BFS over (holds-table, locked) states with 2 principals
  struct State {
    uint8_t holds = 0;  // bitmask
    bool locked = false;
    bool operator<(const State& o) const {
      return std::tie(holds, locked) < std::tie(o.holds, o.locked);
    }
  };
  std::set<State> seen{State{}};
  std::vector<State> frontier{State{}};
  while (!frontier.empty()) {
    State s = frontier.back();
    frontier.pop_back();
    // Acquire(i) for i in {0,1}, guard: not locked
    if (!s.locked) {
      for (int i = 0; i < 2; ++i) {
        State t{static_cast<uint8_t>(s.holds | (1 << i)), true};
        if (seen.insert(t).second) frontier.push_back(t);
      }
    }
  }
  for (const State& s : seen) {
    // target: holds(i) and holds(j) -> i = j
    int count = (s.holds & 1) + ((s.holds >> 1) & 1);
    CHECK(count <= 1);
  }
}
