// Command-line front end: loading spec files, task selection, running the
// checks with optional task-level parallelism, and report emission.
// Exit codes: 0 all valid/established, 1 some invalid/refuted,
// 2 usage or parse error, 3 Unsupported encountered (2 > 3 > 1 > 0 when
// classes mix).

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "soverify/system.hpp"

namespace soverify {

struct RunConfig {
  std::vector<std::string> spec_paths;
  std::vector<std::string> scenarios;   // name filters; empty = all
  std::vector<std::string> invariants;  // name filters; empty = all
  std::string mode_override;            // "", "edt", "equiv"
  int horn_depth_override = -1;         // -1 = per-file setting
  bool trace = false;
  bool json = false;
  int jobs = 1;
  uint32_t seed = 0;
};

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& cfg, const std::string& formula_path, std::ostream& out,
              std::ostream& err);
int cmd_fmt(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace soverify
