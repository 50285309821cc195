#pragma once

// JSON encodings: reduction traces ({step, rule, redex-path, system}
// objects) and machine-readable reports for the CLI.

#include <string>
#include <vector>

#include "json.hpp"
#include "permccs/confined.hpp"
#include "permccs/metatheory.hpp"

namespace permccs {

nlohmann::json trace_json(const std::vector<TraceStep>& trace);
nlohmann::json suite_json(const SuiteReport& report);

// process-level exploration log in the same schema
nlohmann::json graph_trace_json(const ReductionGraph& g,
                                const DefTable& defs);

}  // namespace permccs
