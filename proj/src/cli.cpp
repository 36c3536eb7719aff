#include "soverify/cli.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>

#include "soverify/combine.hpp"
#include "soverify/parser.hpp"
#include "soverify/printer.hpp"
#include "soverify/report.hpp"
#include "soverify/transform.hpp"

namespace soverify {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool selected_name(const std::vector<std::string>& filters, const std::string& name) {
  return std::find(filters.begin(), filters.end(), name) != filters.end();
}

struct TaskOutcome {
  Json json;
  std::string text;
  std::string verdict;
};

int combine_exit(const std::vector<std::string>& verdicts) {
  bool any_unsupported = false, any_invalid = false;
  for (const auto& v : verdicts) {
    any_unsupported |= v == "unsupported";
    any_invalid |= v == "invalid" || v == "not-established";
  }
  if (any_unsupported) return 3;
  if (any_invalid) return 1;
  return 0;
}

} // namespace

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.spec_paths.empty()) {
    err << "error: no spec files given\n";
    return 2;
  }
  std::vector<TaskOutcome> outcomes;
  Json tasks = Json::array();
  std::mutex trace_mutex;
  try {
    for (const auto& path : cfg.spec_paths) {
      SpecFile file = parse_spec(read_file(path));
      TwoLevelSystem& sys = file.systems[0];
      if (cfg.horn_depth_override >= 0) sys.pm.horn_depth = cfg.horn_depth_override;

      TraceSink trace = nullptr;
      if (cfg.trace) {
        trace = [&err, &trace_mutex](const TraceEvent& ev) {
          std::lock_guard<std::mutex> lock(trace_mutex);
          err << trace_event_json(ev).dump() << "\n";
        };
      }

      struct Pending {
        enum class Kind { Scenario, Invariant } kind;
        const Scenario* sc = nullptr;
        const InvariantTask* iv = nullptr;
      };
      // with filters present, only the named tasks of the filtered class run
      bool filtered = !cfg.scenarios.empty() || !cfg.invariants.empty();
      std::vector<Pending> pending;
      for (const auto& sc : file.scenarios) {
        bool run = filtered ? selected_name(cfg.scenarios, sc.name) : true;
        if (run) pending.push_back({Pending::Kind::Scenario, &sc, nullptr});
      }
      for (const auto& iv : file.invariants) {
        bool run = filtered ? selected_name(cfg.invariants, iv.name) : true;
        if (run) pending.push_back({Pending::Kind::Invariant, nullptr, &iv});
      }

      auto run_one = [&](const Pending& p) -> TaskOutcome {
        TaskOutcome o;
        if (p.kind == Pending::Kind::Scenario) {
          ScenarioReport rep = run_scenario(sys, *p.sc, trace);
          o.json = scenario_report_json(sys, rep);
          o.text = scenario_report_text(sys, rep);
          o.verdict = rep.verdict;
        } else {
          InvariantReport rep = check_inductive(sys, *p.iv, cfg.jobs, trace);
          o.json = invariant_report_json(sys, rep);
          o.text = invariant_report_text(sys, rep);
          o.verdict = rep.verdict;
        }
        return o;
      };

      // task-level parallelism; reports join in declaration order
      std::vector<TaskOutcome> file_outcomes(pending.size());
      if (cfg.jobs > 1 && pending.size() > 1) {
        std::vector<std::future<TaskOutcome>> futs;
        for (const auto& p : pending)
          futs.push_back(std::async(std::launch::async, run_one, p));
        for (size_t i = 0; i < futs.size(); ++i) file_outcomes[i] = futs[i].get();
      } else {
        for (size_t i = 0; i < pending.size(); ++i) file_outcomes[i] = run_one(pending[i]);
      }
      for (auto& o : file_outcomes) outcomes.push_back(std::move(o));
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<std::string> verdicts;
  for (const auto& o : outcomes) {
    verdicts.push_back(o.verdict);
    tasks.push_back(o.json);
  }
  if (cfg.json) {
    Json top{{"format", 1}, {"seed", cfg.seed}, {"tasks", std::move(tasks)}};
    out << top.dump(2) << "\n";
  } else {
    for (const auto& o : outcomes) out << o.text;
  }
  return combine_exit(verdicts);
}

int cmd_solve(const RunConfig& cfg, const std::string& formula_path, std::ostream& out,
              std::ostream& err) {
  if (cfg.spec_paths.size() != 1) {
    err << "error: solve needs exactly one spec file\n";
    return 2;
  }
  try {
    SpecFile file = parse_spec(read_file(cfg.spec_paths[0]));
    TwoLevelSystem& sys = file.systems[0];
    if (cfg.horn_depth_override >= 0) sys.pm.horn_depth = cfg.horn_depth_override;

    // query file: (solve (consts (name Sort)...)? (formula f))
    std::string qtext = read_file(formula_path);
    // reuse the spec reader through a tiny wrapper system: declare the
    // listed constants as substrate symbols, then parse the formula
    SubstrateMode mode =
        sys.substrate.equivalence ? SubstrateMode::Equiv : SubstrateMode::Edt;
    if (cfg.mode_override == "edt") mode = SubstrateMode::Edt;
    if (cfg.mode_override == "equiv") mode = SubstrateMode::Equiv;

    TheoryContext ctx = TheoryContext::for_system(sys, mode);
    std::vector<FunId> declared;
    FormulaPtr f = parse_solve_query(sys, ctx.sig, qtext, &declared);

    TraceSink trace = nullptr;
    std::mutex trace_mutex;
    if (cfg.trace) {
      trace = [&err, &trace_mutex](const TraceEvent& ev) {
        std::lock_guard<std::mutex> lock(trace_mutex);
        err << trace_event_json(ev).dump() << "\n";
      };
    }
    Verdict v = is_quantifier_free(f) && is_ground(f) ? tsoa_sat(ctx, f, trace)
                                                      : tsoa_sat_universal(ctx, f, trace);
    switch (v.status) {
      case Status::Sat: {
        out << "sat\n";
        if (v.model) {
          Json j = so_state_json(sys, *v.model);
          Json consts = Json::object();
          for (FunId c : declared) {
            auto e = v.model->eval_term(Term::constant(ctx.sig, c), {});
            SortId s = ctx.sig.fun(c).result;
            consts[ctx.sig.fun(c).name] =
                e ? v.model->domains[static_cast<size_t>(s)][static_cast<size_t>(*e)]
                  : "any";
          }
          if (!consts.empty()) j["consts"] = std::move(consts);
          out << j.dump(2) << "\n";
        }
        return 0;
      }
      case Status::Unsat: {
        out << "unsat\n";
        for (const auto& lit : v.core) out << "  core: " << print_formula(ctx.sig, lit) << "\n";
        return 1;
      }
      case Status::Unsupported:
        out << "unsupported [" << v.reason_code << "] " << v.reason << "\n";
        return 3;
    }
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int cmd_fmt(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.spec_paths.empty()) {
    err << "error: no spec files given\n";
    return 2;
  }
  try {
    for (const auto& path : cfg.spec_paths) {
      SpecFile file = parse_spec(read_file(path));
      out << print_spec_file(file);
    }
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace soverify
