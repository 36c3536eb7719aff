// soverify: check symbolic executability of scenarios and inductive
// invariants of two-level service-oriented specifications.

#include <CLI11.hpp>
#include <iostream>

#include "soverify/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"verifier for two-level service-oriented specifications"};
  app.require_subcommand(1);

  soverify::RunConfig cfg;
  std::string solve_spec;
  std::string formula_path;

  auto add_flags = [&](CLI::App* cmd) {
    cmd->add_option("--horn-depth", cfg.horn_depth_override,
                    "override the Horn saturation depth bound");
    cmd->add_flag("--trace", cfg.trace, "emit combination-loop trace as JSON lines on stderr");
    cmd->add_option("--jobs", cfg.jobs, "run tasks in parallel")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg.seed, "seed recorded in reports");
  };

  CLI::App* check = app.add_subcommand("check", "run scenario and invariant tasks");
  check->add_option("specs", cfg.spec_paths, "spec files (.sospec)")->required();
  add_flags(check);
  check->add_option("--scenario", cfg.scenarios, "run only the named scenarios");
  check->add_option("--invariant", cfg.invariants, "run only the named invariant tasks");
  check->add_flag("--json", cfg.json, "emit the report as JSON");

  CLI::App* solve = app.add_subcommand("solve", "decide one formula against a spec's theories");
  solve->add_option("spec", solve_spec, "spec file (.sospec)")->required();
  solve->add_option("query", formula_path, "query file: (solve (consts ...) (formula f))")
      ->required();
  add_flags(solve);
  solve->add_option("--mode", cfg.mode_override, "substrate mode: edt or equiv")
      ->check(CLI::IsMember({"edt", "equiv"}));

  CLI::App* fmt = app.add_subcommand("fmt", "reprint a spec file in canonical layout");
  fmt->add_option("specs", cfg.spec_paths, "spec files (.sospec)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (check->parsed()) return soverify::cmd_check(cfg, std::cout, std::cerr);
  if (solve->parsed()) {
    cfg.spec_paths = {solve_spec};
    return soverify::cmd_solve(cfg, formula_path, std::cout, std::cerr);
  }
  return soverify::cmd_fmt(cfg, std::cout, std::cerr);
}
