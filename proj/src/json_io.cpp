#include "permccs/json_io.hpp"

#include "permccs/print.hpp"

namespace permccs {

using nlohmann::json;

json trace_json(const std::vector<TraceStep>& trace) {
  json arr = json::array();
  for (auto& st : trace) {
    json o;
    o["step"] = st.step;
    o["rule"] = st.rule;
    o["redex-path"] = st.redex;
    o["system"] = print(st.system);
    arr.push_back(std::move(o));
  }
  return arr;
}

json suite_json(const SuiteReport& r) {
  json o;
  o["suite"] = r.name;
  o["systems"] = r.systems;
  o["checks"] = r.checks;
  o["failures"] = r.failures;
  if (!r.first_counterexample.empty())
    o["counterexample"] = r.first_counterexample;
  return o;
}

json graph_trace_json(const ReductionGraph& g, const DefTable& defs) {
  (void)defs;
  json arr = json::array();
  int step = 0;
  for (auto& [key, succ] : g.edges) {
    for (auto& next : succ) {
      json o;
      o["step"] = step++;
      o["rule"] = "";
      o["redex-path"] = "";
      o["system"] = print(g.nodes.at(next));
      o["from"] = print(g.nodes.at(key));
      arr.push_back(std::move(o));
    }
  }
  return arr;
}

}  // namespace permccs
