// Machine-checked preconditions of the two verification regimes. These are
// the assumptions the decidability results rest on, so violations are
// reported as structured diagnostics rather than silently ignored.

#pragma once

#include <string>
#include <vector>

#include "soverify/system.hpp"

namespace soverify {

enum class TaskMode : uint8_t { Executability, Invariant };

struct Diagnostic {
  std::string code;     // stable machine-readable code (docs/reason-codes.md)
  std::string message;  // names the assumption that is violated
};

std::vector<Diagnostic> check_wellformedness(const TwoLevelSystem& sys, TaskMode mode);

} // namespace soverify
