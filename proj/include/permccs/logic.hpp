#pragma once

// Permission environments and separation-logic formulas together with the
// satisfaction relation, formula separation, and the restriction operators
// used by the proof rules.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "permccs/confined.hpp"
#include "permccs/system.hpp"

namespace permccs {

// ---------------------------------------------------------------------------
// permission environments (Def. 4.1 invariants enforced on construction)

class EnvInvariantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PermEnv {
  std::map<Name, PermSet> map;

  PermEnv() = default;
  explicit PermEnv(std::map<Name, PermSet> m);

  bool has(const Name& c) const { return map.count(c) != 0; }
  const PermSet& at(const Name& c) const;

  // extend with one mapping; revalidates
  PermEnv extend(const Name& c, PermSet e) const;

  bool operator==(const PermEnv& o) const { return map == o.map; }
};

// both well-formedness clauses, as a predicate
bool env_wellformed(const std::map<Name, PermSet>& m);

// drops c and removes {c?, c!} from every codomain set
PermEnv env_restrict(const PermEnv& env, const Name& c);
PermEnv env_restrict(const PermEnv& env, const std::vector<Name>& cs);

PermEnv rename_env(const PermEnv& env, const Name& from, const Name& to);

// ---------------------------------------------------------------------------
// formulas

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { Emp, Any, State, Blk, Sep };

  Kind kind;
  Name chan;                   // State / Blk
  std::vector<ExprPtr> args;   // State
  FormulaPtr left, right;      // Sep

  static FormulaPtr mk_emp();
  static FormulaPtr mk_any();
  static FormulaPtr mk_state(Name c, std::vector<ExprPtr> args);
  static FormulaPtr mk_blk(Name c);
  static FormulaPtr mk_sep(FormulaPtr a, FormulaPtr b);
  static FormulaPtr mk_sep(const std::vector<FormulaPtr>& parts);
};

// built only from emp, c|->(..) and *
bool is_state_formula(const FormulaPtr& f);

std::set<Name> free_vars(const FormulaPtr& f);
std::set<Name> formula_chans(const FormulaPtr& f);
FormulaPtr subst_formula(const FormulaPtr& f, const Subst& sigma);
FormulaPtr rename_formula(const FormulaPtr& f, const Name& from,
                          const Name& to);

// flatten to the multiset of non-emp atoms under *, sorted
std::vector<FormulaPtr> formula_atoms(const FormulaPtr& f);
int compare(const FormulaPtr& a, const FormulaPtr& b);
// equality modulo associativity/commutativity/unit of *
bool formula_ac_equal(const FormulaPtr& a, const FormulaPtr& b);

// edges/triggers (Def. 4.6); nullopt when the formula contains `any`
std::optional<PermSet> formula_edges(const FormulaPtr& f);
std::optional<PermSet> formula_triggers(const FormulaPtr& f);
bool formulas_separate(const FormulaPtr& a, const FormulaPtr& b);

// restriction \c (Def. 5.2): scoped state/blk atoms collapse to `any`
FormulaPtr formula_restrict(const FormulaPtr& f, const std::vector<Name>& cs);

// ---------------------------------------------------------------------------
// satisfaction

enum class SatVerdict { Sat, Unsat, Unknown };

// When Unsat, the most informative failure class discovered across the
// candidate stable systems and splits.
enum class UnsatReason {
  None,               // verdict is not Unsat
  NoSafeEvaluation,   // every path hits a permission violation / no stable
  StructureMismatch,  // stable systems exist but none has the shape
  EnvObligation,      // shape matches but an output misses env(c) perms
  DataMismatch,       // shape matches but the value lists differ
};

struct SatResult {
  SatVerdict verdict = SatVerdict::Unknown;
  UnsatReason reason = UnsatReason::None;
  // stable system witnessing Sat, plus the reduction trace that reached it
  SysPtr witness;
  std::vector<TraceStep> trace;
  bool truncated = false;
  std::string detail;
};

SatResult satisfies(const PermEnv& env, const SysPtr& s, const FormulaPtr& f,
                    const DefTable& defs, const ExploreConfig& cfg = {});

// Test oracle for semantic implication (Def. 4.3) by brute-force
// enumeration of small (env, system) pairs; not used by the proof checker.
struct ImplicationBound {
  std::vector<Name> chans;          // candidate channel universe
  std::vector<Value> values;        // candidate payload values
  int max_atoms = 3;
  int max_args = 2;
  ExploreConfig explore;
};

struct ImplicationResult {
  bool bounded_valid = true;
  // counterexample when not valid
  PermEnv env;
  SysPtr system;
  std::string detail;
};

ImplicationResult semantic_implies_bruteforce(const FormulaPtr& phi,
                                              const FormulaPtr& psi,
                                              const DefTable& defs,
                                              const ImplicationBound& bound);

// Enumerate candidate (env, system) pairs within the bound; used by the
// unsatisfiability regressions and the implication oracle.
void enumerate_candidates(
    const ImplicationBound& bound,
    const std::function<void(const PermEnv&, const SysPtr&)>& yield);

}  // namespace permccs
