#pragma once

// Confined reduction semantics: violation detection, system structural
// equivalence and ~= (equivalence up to owned permissions), the split
// enumeration, safe evaluation with backtracking, and determinism
// certification.

#include <optional>
#include <string>
#include <vector>

#include "permccs/semantics.hpp"
#include "permccs/system.hpp"

namespace permccs {

struct CanonSystem {
  SysPtr norm;
  std::string key;

  bool operator==(const CanonSystem& o) const { return key == o.key; }
  bool operator<(const CanonSystem& o) const { return key < o.key; }
};

CanonSystem canon_system(const SysPtr& s, const DefTable& defs);
bool sys_struct_eq(const SysPtr& a, const SysPtr& b, const DefTable& defs);

// Equivalence up to owned permissions: leaf boundaries respected, leaf
// permission sets ignored (and <E>{0} leaves behave as the unit).
std::string quaseq_key(const SysPtr& s, const DefTable& defs);
bool quaseq(const SysPtr& a, const SysPtr& b, const DefTable& defs);

// err: some confined leaf is, up to structural equivalence, exactly a bare
// output lacking c! or a bare input lacking c?. Returns a printed witness
// leaf when violating.
std::optional<std::string> has_violation(const SysPtr& s,
                                         const DefTable& defs);

enum class SysRule {
  cThn, cEls, cCom, cPrc, cSpl, cLcl, cTgh, cDsc
};

const char* rule_name(SysRule r);

class CapExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SysStep {
  SysRule rule;
  std::string redex;  // leaf indices in the flattened view
  SysPtr result;
};

// All one-step successors per Fig. 2, modulo structural equivalence.
// Permission-set splits larger than cfg.split_cap raise CapExceeded.
std::vector<SysStep> sys_step(const SysPtr& s, const DefTable& defs,
                              const ExploreConfig& cfg = {});

bool is_safely_stable(const SysPtr& s, const DefTable& defs,
                      const ExploreConfig& cfg = {});
// O(n) characterization from the safe-stability/system-structure
// proposition; cross-checked against the definition in the test suites.
bool is_safely_stable_structural(const SysPtr& s, const DefTable& defs);

struct TraceStep {
  int step = 0;
  std::string rule;   // empty on the initial snapshot
  std::string redex;
  SysPtr system;
};

enum class SafeEvalStatus { Found, NoneProven, Budget };

struct SafeEvalResult {
  SafeEvalStatus status = SafeEvalStatus::NoneProven;
  SysPtr result;                  // safely-stable system when Found
  std::vector<TraceStep> trace;   // path from the initial system
  // deepest violation witness encountered (for reporting on failure)
  std::string violation_witness;
  long explored = 0;
};

// Depth-first search with backtracking over split choices; deterministic
// rules are explored before splits and cDsc/cTgh are preferred eagerly.
// States whose canonical form was already visited, and states that already
// carry a violation, are pruned.
SafeEvalResult evaluate_safe(const SysPtr& s, const DefTable& defs,
                             const ExploreConfig& cfg = {});

// Exhaustive bounded exploration of the confined reduction graph; collects
// every reachable safely-stable system. Used by the satisfaction relation
// and the metatheory suites.
struct SafeExploreResult {
  std::vector<SysPtr> stable;                 // distinct safely-stable states
  std::vector<std::vector<TraceStep>> traces; // one witness path per state
  bool truncated = false;
  bool any_violation = false;
  std::string violation_witness;
  long explored = 0;
};

SafeExploreResult explore_safe(const SysPtr& s, const DefTable& defs,
                               const ExploreConfig& cfg = {});

struct CertifyResult {
  bool certified = false;
  CanonProcess result;         // canon(erase(T)) when certified
  SafeEvalResult safe;         // underlying narrative search
};

// Cor. 3.19: a successful safe evaluation certifies that |S| evaluates
// deterministically to |T|.
CertifyResult certify_deterministic(const SysPtr& s, const DefTable& defs,
                                    const ExploreConfig& cfg = {});

}  // namespace permccs
