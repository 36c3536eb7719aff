#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "soverify/cli.hpp"
#include "soverify/parser.hpp"
#include "soverify/printer.hpp"
#include "soverify/symexec.hpp"

using namespace soverify;

#ifndef SOVERIFY_SPEC_DIR
#define SOVERIFY_SPEC_DIR "specs"
#endif

namespace {

std::string spec(const std::string& rel) { return std::string(SOVERIFY_SPEC_DIR) + "/" + rel; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("check maps verdict classes to exit codes") {
  std::ostringstream out, err;

  RunConfig ok;
  ok.spec_paths = {spec("car_registration.sospec")};
  ok.scenarios = {"get-role-cert"};
  CHECK(cmd_check(ok, out, err) == 0);

  RunConfig unsupported;
  unsupported.spec_paths = {spec("car_registration.sospec")};
  unsupported.invariants = {"Integrity"};
  CHECK(cmd_check(unsupported, out, err) == 3);

  RunConfig invalid;
  invalid.spec_paths = {spec("toys/toy_clear.sospec")};
  invalid.scenarios = {"wipe-wrong"};
  CHECK(cmd_check(invalid, out, err) == 1);

  RunConfig missing;
  missing.spec_paths = {spec("does_not_exist.sospec")};
  CHECK(cmd_check(missing, out, err) == 2);
}

TEST_CASE("solve decides query files with the right exit codes") {
  std::ostringstream err;

  RunConfig cfg;
  cfg.spec_paths = {spec("car_registration.sospec")};

  std::ostringstream unsat_out;
  CHECK(cmd_solve(cfg, spec("queries/ed-is-helen.solve"), unsat_out, err) == 1);
  CHECK(unsat_out.str().find("unsat") == 0);

  std::ostringstream sat_out;
  CHECK(cmd_solve(cfg, spec("queries/enabledness.solve"), sat_out, err) == 0);
  // the witness constants collapse onto Ed, as in the worked derivation
  CHECK(sat_out.str().find("\"k1\": \"Ed\"") != std::string::npos);
  CHECK(sat_out.str().find("\"k2\": \"Ed\"") != std::string::npos);
}

TEST_CASE("fmt output matches the stored golden") {
  RunConfig cfg;
  cfg.spec_paths = {spec("example2.sospec")};
  std::ostringstream out, err;
  REQUIRE(cmd_fmt(cfg, out, err) == 0);
  CHECK(out.str() == slurp("goldens/example2.fmt"));
}

TEST_CASE("identical inputs and seed give byte-identical JSON reports") {
  RunConfig cfg;
  cfg.spec_paths = {spec("example2.sospec"), spec("toys/toy_lock.sospec")};
  cfg.json = true;
  cfg.seed = 7;
  cfg.jobs = 2;
  std::ostringstream o1, o2, e1, e2;
  int r1 = cmd_check(cfg, o1, e1);
  int r2 = cmd_check(cfg, o2, e2);
  CHECK(r1 == r2);
  CHECK(o1.str() == o2.str());
  CHECK(!o1.str().empty());
  // the seed is embedded in the report
  CHECK(o1.str().find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("the horn depth override is bound-relative, not a refutation") {
  // at depth 0 the knowledge chain cannot be derived, so the step's triple
  // loses its only refutation and is reported invalid (the documented
  // incompleteness of the bounded regime)
  RunConfig cfg;
  cfg.spec_paths = {spec("car_registration.sospec")};
  cfg.scenarios = {"get-role-cert"};
  cfg.horn_depth_override = 0;
  std::ostringstream out, err;
  CHECK(cmd_check(cfg, out, err) == 1);
  CHECK(out.str().find("triple invalid") != std::string::npos);
}

TEST_CASE("solve replays the stored oracle corpus") {
  // formulas with verdicts precomputed by exhaustive finite-model
  // enumeration; solve must reproduce every stored answer
  std::ifstream in(spec("queries/oracle_corpus.txt"));
  REQUIRE(in.good());
  RunConfig cfg;
  cfg.spec_paths = {spec("oracle_fixture.sospec")};
  std::string line;
  int replayed = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == ';') continue;
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    std::string expect = line.substr(0, tab);
    std::string formula = line.substr(tab + 1);
    std::string qpath =
        (std::filesystem::temp_directory_path() / "soverify_corpus_query.tmp").string();
    {
      std::ofstream q(qpath);
      q << "(solve (formula " << formula << "))\n";
    }
    std::ostringstream out, err;
    int rc = cmd_solve(cfg, qpath, out, err);
    CAPTURE(formula);
    CHECK(rc == (expect == "sat" ? 0 : 1));
    ++replayed;
  }
  std::filesystem::remove(std::filesystem::temp_directory_path() /
                          "soverify_corpus_query.tmp");
  CHECK(replayed >= 50);
}

TEST_CASE("trace lines stream to the error channel") {
  RunConfig cfg;
  cfg.spec_paths = {spec("toys/toy_clear.sospec")};
  cfg.scenarios = {"wipe"};
  cfg.trace = true;
  std::ostringstream out, err;
  CHECK(cmd_check(cfg, out, err) == 0);
  CHECK(err.str().find("\"iteration\"") != std::string::npos);
}

TEST_CASE("the worked example's trace stays within a loose bound") {
  SpecFile f = parse_spec(slurp(spec("car_registration.sospec")));
  const TwoLevelSystem& sys = f.systems[0];
  const Scenario* sc = nullptr;
  for (const auto& s : f.scenarios)
    if (s.name == "get-role-cert") sc = &s;
  REQUIRE(sc);
  int events = 0;
  ScenarioReport rep = run_scenario(sys, *sc, [&](const TraceEvent&) { ++events; });
  CHECK(rep.verdict == "valid");
  CHECK(events > 0);
  CHECK(events <= 64);  // loose: pins the loop's order of magnitude only
}
