#pragma once

#include <string>

#include <json.hpp>

#include "gft/script/interp.hpp"

namespace gft::script {

// Machine-readable report. Field names are part of the tool's contract and
// are documented in the README. Serialization is deterministic for a fixed
// (script, options, seed); per-assertion timings are added only on request
// since they vary between runs.
inline std::string report_to_json(const RunReport& report, const RunOptions& options) {
  nlohmann::ordered_json j;
  j["script"] = report.script_name;
  j["seed"] = options.seed;
  j["trials"] = options.trials;
  j["oracle"] = options.oracle;
  j["order"] = options.order_twice;
  j["status"] = report.status;
  j["exit_code"] = report.exit_code;
  j["passed"] = report.passed;
  j["failed"] = report.failed;
  j["unproven"] = report.unproven;
  j["errors"] = report.errors;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    nlohmann::ordered_json rec;
    rec["id"] = r.id;
    rec["kind"] = r.kind;
    rec["label"] = r.label;
    rec["status"] = r.status;
    rec["residual"] = r.residual;
    if (!r.tier.empty()) rec["tier"] = r.tier;
    if (!r.detail.empty()) rec["detail"] = r.detail;
    if (r.oracle.checked) {
      nlohmann::ordered_json o;
      o["trials"] = r.oracle.trials;
      o["equivalent"] = r.oracle.equivalent;
      if (!r.oracle.witness.empty()) o["witness"] = r.oracle.witness;
      rec["oracle"] = o;
    }
    if (options.timings) rec["elapsed_ms"] = r.elapsed_ms;
    arr.push_back(rec);
  }
  j["assertions"] = arr;
  return j.dump(2) + "\n";
}

}  // namespace gft::script
