#pragma once

// Sequents, the boolean entailment backend, the conservative formula
// implication used by lImp, and the rule-by-rule proof checker.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "permccs/logic.hpp"

namespace permccs {

struct Sequent {
  PermEnv env;
  BoolPtr cond;
  FormulaPtr pre;
  SysPtr sys;
  FormulaPtr post;
};

// ---------------------------------------------------------------------------
// boolean entailment  b1 |= b2

enum class EntailVerdict { Valid, Refuted, BoundedValid };

struct EntailResult {
  EntailVerdict verdict = EntailVerdict::BoundedValid;
  Subst witness;         // Refuted
  bool exhaustive = false;  // BoundedValid: the whole [-B,B]^n box was scanned
  Value bound = 0;
};

struct EntailConfig {
  Value bound = 64;        // per-variable scan bound
  int var_cap = 6;
  long scan_limit = 3000000;  // total assignments tried
  long dnf_limit = 4096;      // branches in the linear frontend
};

class TooManyVariables : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

EntailResult bool_entails(const BoolPtr& b1, const BoolPtr& b2,
                          const EntailConfig& cfg = {});

// Syntactic entailment modulo the commutative monoid (*, emp), with
// `any` absorbing arbitrary subformulas. Conservative: anything beyond
// this theory is rejected.
bool formula_implies(const FormulaPtr& phi, const FormulaPtr& psi);

// ---------------------------------------------------------------------------
// proof scripts

enum class Rule {
  lNil, lFls, lBlk, lOut, lIn, lIf, lDef, lPar, lSpl, lRes, lLcl,
  lInst, lSub, lImp, lRen,
  // derived
  lCut, lSep, lSepSt, lOutD, lInD, lFrm, lFrmSt,
};

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& s);

// rule-specific witnesses; only the fields a rule consumes are read
struct Instantiation {
  std::optional<Name> chan;
  std::vector<ExprPtr> args;        // lIn/lInD message expressions
  std::optional<int> leaf;          // leaf index in the flattened system
  std::vector<int> left_leaves;     // lPar/lCut/lSep*: S-side leaf indices
  std::vector<int> left_atoms;      // lSpl: body atoms for the left child
  std::optional<PermSet> left_perms;  // lSpl
  FormulaPtr pre1, pre2, post1, post2, cut, frame, pre, post;
  std::vector<Name> chans;          // lRes
  std::optional<PermEnv> env;       // lRes premise environment
  std::optional<Name> var;          // lInst/lSub
  ExprPtr expr;                     // lInst/lSub
  std::optional<Name> from, to;     // lRen
  std::shared_ptr<Sequent> sequent;  // explicit premise (lInst/lImp/lRen)
};

struct ProofNode {
  Rule rule;
  Instantiation inst;
  std::vector<ProofNode> children;
  // filled in during checking
  mutable std::shared_ptr<Sequent> conclusion;
};

struct ProofScript {
  DefTable defs;
  Sequent root;
  ProofNode tree;
};

struct RuleError {
  std::string path;  // child indices from the root, "" for the root node
  std::string rule;
  std::string reason;
};

struct CheckConfig {
  EntailConfig entail;
  bool accept_bounded = true;  // accept BoundedValid entailments
};

struct CheckResult {
  bool ok = false;
  Sequent root;
  std::vector<RuleError> errors;
};

CheckResult check_proof(const ProofScript& script,
                        const CheckConfig& cfg = {});

// validate one node against its conclusion; premises assumed checked.
// On success fills in the premise sequents for the children.
std::optional<RuleError> check_step(const ProofNode& node,
                                    const Sequent& conclusion,
                                    const DefTable& defs,
                                    const CheckConfig& cfg,
                                    std::vector<Sequent>& premises,
                                    const std::string& path = "");

// ---------------------------------------------------------------------------
// bounded semantic check of sequent satisfaction (Def. 5.1)

struct SemanticSpec {
  std::vector<Subst> sigmas;  // closing substitutions to sample
  ExploreConfig explore;
};

enum class SemanticVerdict { BoundedValid, Counterexample, Unknown };

struct SemanticResult {
  SemanticVerdict verdict = SemanticVerdict::Unknown;
  std::string detail;
  long points_checked = 0;
};

SemanticResult sequent_holds_semantically(const Sequent& sq,
                                          const DefTable& defs,
                                          const SemanticSpec& spec);

// Process sequent satisfaction (existential over a narrative): checks the
// given (env, E) narrative and reports it.
SemanticResult process_sequent_holds(const ProcPtr& p, const PermSet& e,
                                     const PermEnv& env, const BoolPtr& cond,
                                     const FormulaPtr& pre,
                                     const FormulaPtr& post,
                                     const DefTable& defs,
                                     const SemanticSpec& spec);

// Canonical context system synthesized from a (closed) precondition; the
// shape used when sampling Def. 5.1.
std::optional<SysPtr> context_from_formula(const FormulaPtr& f,
                                           const PermEnv& env);

}  // namespace permccs
