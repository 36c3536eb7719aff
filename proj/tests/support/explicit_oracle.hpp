// Explicit-state enumeration oracle for the toy corpus: every sort is
// either enumerated (executability toys) or the Id sort interpreted over
// small domains (invariant toys); states, policy tables, and transition
// witnesses are enumerated outright and formulas evaluated directly.
//
// Policy predicates are interpreted by any table closed under the rules in
// both the pre- and post-state, mirroring the first-order semantics the
// engine implements (rules give lower bounds, not least models).

#pragma once

#include "soverify/system.hpp"
#include "support/test_util.hpp"

namespace soverify::testing {

// executability toys: all sorts enumerated
bool exec_enabled_oracle(const TwoLevelSystem& sys, const FormulaPtr& pre,
                         const Transition& tau);
bool exec_triple_valid_oracle(const TwoLevelSystem& sys, const FormulaPtr& pre,
                              const Transition& tau, const FormulaPtr& post);

// invariant toys: purely relational over the Id sort; domains of size
// 1..max_domain with every assignment of the declared Id constants
bool inv_I1_holds_oracle(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                         int max_domain);
bool inv_I2_holds_oracle(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                         const FormulaPtr& target, int max_domain);
bool inv_I3_holds_oracle(const TwoLevelSystem& sys, const FormulaPtr& candidate,
                         const Transition& tau, int max_domain);

} // namespace soverify::testing
