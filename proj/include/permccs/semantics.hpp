#pragma once

// Unconstrained reduction semantics: canonical forms for structural
// equivalence, one-step reduction, bounded evaluation and the determinism
// check.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "permccs/ast.hpp"

namespace permccs {

// Canonical representative of a structural-equivalence class. `norm` is a
// process in canonical shape (restrictions hoisted and canonically named,
// parallel components sorted, nils dropped); `key` is its printed form and
// decides equality.
struct CanonProcess {
  ProcPtr norm;
  std::string key;

  bool operator==(const CanonProcess& o) const { return key == o.key; }
  bool operator<(const CanonProcess& o) const { return key < o.key; }
};

CanonProcess canon(const ProcPtr& p, const DefTable& defs);
bool struct_eq(const ProcPtr& a, const ProcPtr& b, const DefTable& defs);

class StuckOnOpenTerm : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ProcRule { rThn, rEls, rCom, rPrc };

const char* rule_name(ProcRule r);

struct ProcStep {
  ProcRule rule;
  std::string redex;  // path into the flattened view, e.g. "atom 2" / "atoms 0,3"
  ProcPtr result;
};

// All one-step successors (raw terms; collapse modulo struct_eq happens at
// exploration time).
std::vector<ProcStep> step(const ProcPtr& p, const DefTable& defs);

struct ExploreConfig {
  long budget = 10000;     // max explored states
  int split_cap = 14;      // max |E| for cSpl enumeration (systems)
  bool collect_all = true; // keep exploring after the first stable state
  // Commit to forced steps instead of interleaving them. Conditional,
  // unfolding, communication, scope-opening and permission-discard steps
  // preserve both safe evaluability and the reachable stable states up to
  // scoped-permission placement, so exploring one order suffices; split
  // choices and scope-tightening are still branched over.
  bool commit_forced = true;
};

class BudgetExhausted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ReductionGraph {
  // canonical key -> representative raw term
  std::map<std::string, ProcPtr> nodes;
  // canonical key -> set of successor canonical keys
  std::map<std::string, std::set<std::string>> edges;
  std::string root;
  bool truncated = false;
  long explored = 0;
};

ReductionGraph explore(const ProcPtr& p, const DefTable& defs,
                       const ExploreConfig& cfg = {});

struct EvalResult {
  std::vector<CanonProcess> stable;  // reachable stable classes, sorted
  std::map<std::string, ProcPtr> representatives;  // pretty raw terms
  bool truncated = false;
};

EvalResult evaluate(const ProcPtr& p, const DefTable& defs,
                    const ExploreConfig& cfg = {});

enum class Determinism { Deterministic, NonDeterministic, Diverges, Unknown };

struct DeterminismResult {
  Determinism verdict = Determinism::Unknown;
  // NonDeterministic: two stable results in distinct classes
  ProcPtr witness1, witness2;
  // Diverges: a state on a reachable cycle
  ProcPtr lasso;
  EvalResult eval;
};

DeterminismResult is_deterministic(const ProcPtr& p, const DefTable& defs,
                                   const ExploreConfig& cfg = {});

}  // namespace permccs
