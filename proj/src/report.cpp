#include "soverify/report.hpp"

#include <sstream>

#include "soverify/printer.hpp"

namespace soverify {

Json so_state_json(const TwoLevelSystem& sys, const FiniteStructure& m) {
  const Signature& sig = sys.sig;
  Json wf = Json::object();
  for (FunId x : sys.state_vars) {
    auto it = m.funcs.find({x, false});
    if (it == m.funcs.end()) continue;
    auto vit = it->second.find({});
    if (vit == it->second.end()) continue;
    SortId s = sig.fun(x).result;
    wf[sig.fun(x).name] = m.domains[static_cast<size_t>(s)][static_cast<size_t>(vit->second)];
  }
  Json pm = Json::object();
  for (PredId p : sys.state_preds) {
    Json rows = Json::array();
    auto it = m.preds.find({p, false});
    if (it != m.preds.end()) {
      for (const auto& tuple : it->second) {
        Json row = Json::array();
        for (size_t i = 0; i < tuple.size(); ++i) {
          SortId s = sig.pred(p).args[i];
          row.push_back(m.domains[static_cast<size_t>(s)][static_cast<size_t>(tuple[i])]);
        }
        rows.push_back(std::move(row));
      }
    }
    pm[sig.pred(p).name] = std::move(rows);
  }
  return Json{{"wf", std::move(wf)}, {"pm", std::move(pm)}};
}

namespace {

Json witness_json(const std::vector<std::pair<std::string, std::string>>& w) {
  Json j = Json::object();
  for (const auto& [var, val] : w) j[var] = val;
  return j;
}

} // namespace

Json scenario_report_json(const TwoLevelSystem& sys, const ScenarioReport& rep) {
  Json steps = Json::array();
  for (const auto& st : rep.steps) {
    Json enabled{{"status", st.enabled.unsupported ? "unsupported"
                                                   : (st.enabled.enabled ? "enabled" : "disabled")}};
    if (st.enabled.enabled) enabled["witness"] = witness_json(st.enabled.witness);
    if (st.enabled.unsupported) enabled["reason_code"] = st.enabled.reason_code;
    Json triple;
    switch (st.triple.status) {
      case TripleStatus::Valid: triple["status"] = "valid"; break;
      case TripleStatus::Invalid: triple["status"] = "invalid"; break;
      case TripleStatus::Unsupported:
        triple["status"] = "unsupported";
        triple["reason_code"] = st.triple.reason_code;
        triple["reason"] = st.triple.reason;
        break;
    }
    if (!st.triple.obligation_text.empty()) {
      triple["obligation"] = st.triple.obligation_text;
      Json consts = Json::array();
      for (const auto& [n, srt] : st.triple.fresh_consts)
        consts.push_back(Json{{"name", n}, {"sort", srt}});
      triple["consts"] = std::move(consts);
    }
    Json step{{"index", st.index},
              {"transition", st.transition},
              {"enabled", std::move(enabled)},
              {"triple", std::move(triple)}};
    if (st.triple.countermodel) {
      step["countermodel"] = so_state_json(sys, *st.triple.countermodel);
      step["witness"] = witness_json(st.triple.witness_values);
    }
    steps.push_back(std::move(step));
  }
  Json diags = Json::array();
  for (const auto& d : rep.diagnostics)
    diags.push_back(Json{{"code", d.code}, {"message", d.message}});
  Json j{{"scenario", rep.scenario}, {"system", rep.system}};
  if (!rep.diagnostics.empty()) j["diagnostics"] = std::move(diags);
  j["steps"] = std::move(steps);
  j["verdict"] = rep.verdict;
  return j;
}

Json invariant_report_json(const TwoLevelSystem& sys, const InvariantReport& rep) {
  Json obs = Json::array();
  for (const auto& ob : rep.obligations) {
    Json o{{"kind", ob.kind}};
    if (!ob.transition.empty()) o["transition"] = ob.transition;
    o["verdict"] = ob.verdict;
    if (!ob.obligation_text.empty()) {
      o["obligation"] = ob.obligation_text;
      Json consts = Json::array();
      for (const auto& [n, srt] : ob.fresh_consts)
        consts.push_back(Json{{"name", n}, {"sort", srt}});
      o["consts"] = std::move(consts);
    }
    if (!ob.reason_code.empty()) {
      o["reason_code"] = ob.reason_code;
      o["reason"] = ob.reason;
    }
    if (ob.counterexample) {
      // counterexamples refute induction, not reachability
      o["counterexample"] = so_state_json(sys, *ob.counterexample);
      o["note"] = "counterexample to induction; the state need not be reachable";
    }
    obs.push_back(std::move(o));
  }
  Json diags = Json::array();
  for (const auto& d : rep.diagnostics)
    diags.push_back(Json{{"code", d.code}, {"message", d.message}});
  Json j{{"task", rep.task}, {"system", rep.system}};
  if (!rep.diagnostics.empty()) j["diagnostics"] = std::move(diags);
  j["obligations"] = std::move(obs);
  j["verdict"] = rep.verdict;
  return j;
}

std::string scenario_report_text(const TwoLevelSystem& sys, const ScenarioReport& rep) {
  (void)sys;
  std::ostringstream os;
  os << "scenario " << rep.scenario << ": " << rep.verdict << "\n";
  for (const auto& d : rep.diagnostics) os << "  diagnostic [" << d.code << "] " << d.message << "\n";
  for (const auto& st : rep.steps) {
    os << "  step " << st.index << " " << st.transition << ": ";
    if (st.enabled.unsupported) {
      os << "enabledness unsupported [" << st.enabled.reason_code << "]";
    } else if (st.enabled.enabled) {
      os << "enabled";
      if (!st.enabled.witness.empty()) {
        os << " (";
        for (size_t i = 0; i < st.enabled.witness.size(); ++i)
          os << (i ? ", " : "") << st.enabled.witness[i].first << " = "
             << st.enabled.witness[i].second;
        os << ")";
      }
    } else {
      os << "disabled (triple holds vacuously)";
    }
    os << ", triple ";
    switch (st.triple.status) {
      case TripleStatus::Valid: os << "valid"; break;
      case TripleStatus::Invalid: os << "invalid"; break;
      case TripleStatus::Unsupported:
        os << "unsupported [" << st.triple.reason_code << "] " << st.triple.reason;
        break;
    }
    os << "\n";
  }
  return os.str();
}

std::string invariant_report_text(const TwoLevelSystem& sys, const InvariantReport& rep) {
  (void)sys;
  std::ostringstream os;
  os << "invariant " << rep.task << ": " << rep.verdict << "\n";
  for (const auto& d : rep.diagnostics) os << "  diagnostic [" << d.code << "] " << d.message << "\n";
  for (const auto& ob : rep.obligations) {
    os << "  " << ob.kind;
    if (!ob.transition.empty()) os << "(" << ob.transition << ")";
    os << ": " << ob.verdict;
    if (!ob.reason_code.empty()) os << " [" << ob.reason_code << "] " << ob.reason;
    if (ob.counterexample) os << " (counterexample to induction, not reachability)";
    os << "\n";
  }
  return os.str();
}

Json trace_event_json(const TraceEvent& ev) {
  const char* names[] = {"sat", "unsat", "unsupported"};
  Json j{{"iteration", ev.iteration},
         {"wf", names[static_cast<int>(ev.wf)]},
         {"pm", names[static_cast<int>(ev.pm)]}};
  if (!ev.learned.empty()) j["learned"] = ev.learned;
  return j;
}

} // namespace soverify
