#pragma once

// Randomized metatheory suites: each one asserts one of the dynamic
// properties of the confined semantics over seeded random systems and
// reports the first counterexample found.

#include <string>
#include <vector>

#include "permccs/gen.hpp"
#include "permccs/logic.hpp"

namespace permccs {

struct SuiteReport {
  std::string name;
  int systems = 0;
  long checks = 0;
  int failures = 0;
  std::string first_counterexample;

  bool ok() const { return failures == 0; }
};

std::vector<std::string> metatheory_suite_names();

SuiteReport run_metatheory_suite(const std::string& name, const GenSpec& spec,
                                 int count,
                                 const ExploreConfig& explore = {});

}  // namespace permccs
