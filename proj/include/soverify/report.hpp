// Report assembly: scenario and invariant results rendered as stable JSON
// (byte-identical across runs for the same inputs) and as human-readable
// text. Obligation formulas are embedded in DSL syntax so any failure can
// be replayed through `soverify solve`.

#pragma once

#include <string>

#include "soverify/invcheck.hpp"

// single-header vendored json
#include <json.hpp>

namespace soverify {

using Json = nlohmann::ordered_json;

Json so_state_json(const TwoLevelSystem& sys, const FiniteStructure& m);
Json scenario_report_json(const TwoLevelSystem& sys, const ScenarioReport& rep);
Json invariant_report_json(const TwoLevelSystem& sys, const InvariantReport& rep);

std::string scenario_report_text(const TwoLevelSystem& sys, const ScenarioReport& rep);
std::string invariant_report_text(const TwoLevelSystem& sys, const InvariantReport& rep);

Json trace_event_json(const TraceEvent& ev);

} // namespace soverify
