// Exhaustive joint finite-model oracle for mixed ground formulas over the
// criterion-3 fixture: EDT sorts Id (3) and Role (2), message constants
// with a MsgPass-style set sort, and a small Datalog policy level.
//
// The oracle enumerates models of the axioms, not of one intended
// structure: message classes are congruences of the mentioned constants
// (plus anonymous slack elements), set classes are non-extensional with
// membership rows pinned by the MsgPass axioms relative to their parents,
// and PM tables are any rule-closed tables. Satisfiability is checked per
// Boolean abstraction of the formula's PM atoms with a Horn closure test,
// so the full table space never has to be enumerated.

#pragma once

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "soverify/system.hpp"
#include "support/test_util.hpp"

namespace soverify::testing {

struct JointOracleFixture {
  TwoLevelSystem sys;
  SortId id, role, msg, setofmsg;
  std::vector<TermPtr> id_consts;    // c1 c2 c3 (EDT) then a0 a1 (free)
  std::vector<TermPtr> role_consts;  // r1 r2 (EDT) then rr (free)
  std::vector<TermPtr> msg_consts;   // m0 m1
  TermPtr s0, mty;
  PredId mem, p, q;

  static JointOracleFixture make();
};

// Exhaustive satisfiability of a ground formula over the fixture.
bool joint_oracle_satisfiable(const JointOracleFixture& fx, const FormulaPtr& f);

} // namespace soverify::testing
