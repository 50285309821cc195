#pragma once

// Abstract syntax for the asynchronous value-passing calculus: integer
// expressions, boolean conditions, processes and process definitions.
// All nodes are immutable and shared; substitution and renaming build
// fresh trees.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace permccs {

using Name = std::string;  // channel names, variable names, definition names
using Value = std::int64_t;

// ---------------------------------------------------------------------------
// errors

enum class EvalErrorKind { UnboundVariable, Overflow };

class EvalError : public std::runtime_error {
public:
  EvalError(EvalErrorKind kind, std::string what)
      : std::runtime_error(std::move(what)), kind_(kind) {}
  EvalErrorKind kind() const { return kind_; }

private:
  EvalErrorKind kind_;
};

// ---------------------------------------------------------------------------
// expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Lit, Var, Add, Sub };

  Kind kind;
  Value lit = 0;       // Lit
  Name var;            // Var
  ExprPtr lhs, rhs;    // Add/Sub

  static ExprPtr mk_lit(Value v);
  static ExprPtr mk_var(Name x);
  static ExprPtr mk_add(ExprPtr a, ExprPtr b);
  static ExprPtr mk_sub(ExprPtr a, ExprPtr b);
};

struct BoolExpr;
using BoolPtr = std::shared_ptr<const BoolExpr>;

// Leq / Not / And are the primitive connectives; everything else
// (=, <, true, false, or, =>) is desugared at construction time.
struct BoolExpr {
  enum class Kind { Leq, Not, And };

  Kind kind;
  ExprPtr e1, e2;  // Leq
  BoolPtr b1, b2;  // Not (b1), And

  static BoolPtr mk_leq(ExprPtr a, ExprPtr b);
  static BoolPtr mk_not(BoolPtr b);
  static BoolPtr mk_and(BoolPtr a, BoolPtr b);

  // desugarings
  static BoolPtr mk_eq(ExprPtr a, ExprPtr b);
  static BoolPtr mk_lt(ExprPtr a, ExprPtr b);
  static BoolPtr mk_or(BoolPtr a, BoolPtr b);
  static BoolPtr mk_implies(BoolPtr a, BoolPtr b);
  static BoolPtr mk_true();
  static BoolPtr mk_false();
};

// ---------------------------------------------------------------------------
// processes

struct Process;
using ProcPtr = std::shared_ptr<const Process>;

struct Process {
  enum class Kind { Out, In, If, Call, Nil, Par, New };

  Kind kind;

  // Out: chan!(args)          chan, args
  // In:  chan?(params).cont   chan, params, cont
  // If:  if guard then left else right
  // Call: defname(args)[renaming], renaming maps formal -> actual
  // Par: left | right
  // New: new chan. cont
  Name chan;
  std::vector<ExprPtr> args;
  std::vector<Name> params;
  BoolPtr guard;
  Name defname;
  std::vector<std::pair<Name, Name>> renaming;  // (actual, formal) pairs
  ProcPtr cont, left, right;

  static ProcPtr mk_out(Name c, std::vector<ExprPtr> args);
  static ProcPtr mk_in(Name c, std::vector<Name> xs, ProcPtr cont);
  static ProcPtr mk_if(BoolPtr b, ProcPtr thn, ProcPtr els);
  static ProcPtr mk_call(Name def, std::vector<ExprPtr> args,
                         std::vector<std::pair<Name, Name>> renaming = {});
  static ProcPtr mk_nil();
  static ProcPtr mk_par(ProcPtr a, ProcPtr b);
  static ProcPtr mk_new(Name c, ProcPtr body);
  static ProcPtr mk_new(const std::vector<Name>& cs, ProcPtr body);
};

// ---------------------------------------------------------------------------
// definitions

struct Def {
  std::vector<Name> params;    // value parameters
  std::vector<Name> formals;   // renameable channels: free channels of body
  ProcPtr body;
};

struct DefTable {
  std::map<Name, Def> defs;

  bool has(const Name& n) const { return defs.count(n) != 0; }
  const Def& at(const Name& n) const;
  // Registers a definition; formals are (re)computed from the body.
  void add(const Name& n, std::vector<Name> params, ProcPtr body);
};

// ---------------------------------------------------------------------------
// substitutions: finite maps var -> expr (values are the Lit special case)

struct Subst {
  std::map<Name, ExprPtr> map;

  static Subst of_values(const std::vector<Name>& xs,
                         const std::vector<Value>& vs);
  static Subst of_exprs(const std::vector<Name>& xs,
                        const std::vector<ExprPtr>& es);
  bool empty() const { return map.empty(); }
};

// ---------------------------------------------------------------------------
// evaluation

Value eval_expr(const ExprPtr& e, const Subst& sigma);
bool eval_bool(const BoolPtr& b, const Subst& sigma);
inline Value eval_expr(const ExprPtr& e) { return eval_expr(e, Subst{}); }
inline bool eval_bool(const BoolPtr& b) { return eval_bool(b, Subst{}); }
std::vector<Value> eval_exprs(const std::vector<ExprPtr>& es,
                              const Subst& sigma);

// checked arithmetic on the 64-bit value domain
Value checked_add(Value a, Value b);
Value checked_sub(Value a, Value b);

// ---------------------------------------------------------------------------
// free names / variables

std::set<Name> free_vars(const ExprPtr& e);
std::set<Name> free_vars(const BoolPtr& b);
std::set<Name> free_vars(const ProcPtr& p);

// Free channel names. Calls contribute the effective targets of all the
// definition's formal channels, so the result is definition-aware.
std::set<Name> free_chans(const ProcPtr& p, const DefTable& defs);

// ---------------------------------------------------------------------------
// substitution and channel renaming (capture-avoiding)

ExprPtr subst_expr(const ExprPtr& e, const Subst& sigma);
BoolPtr subst_bool(const BoolPtr& b, const Subst& sigma);
ProcPtr substitute(const ProcPtr& p, const Subst& sigma);

// Simultaneous renaming of free channel names. `pairs` holds
// (actual, formal) entries, read as [actual/formal]; New binders are
// alpha-renamed when they would capture a target name.
ProcPtr rename_channels(const ProcPtr& p,
                        const std::vector<std::pair<Name, Name>>& pairs,
                        const DefTable& defs);

// Unfold one call: body with params := eval(args) and formals renamed to
// their effective targets.
ProcPtr unfold_call(const Process& call, const DefTable& defs);

// Effective renaming map of a call: formal -> actual for every declared
// formal channel of the definition (identity when not renamed).
std::map<Name, Name> call_effective_map(const Process& call,
                                        const DefTable& defs);

// fresh name generation: base plus a numeric suffix avoiding `taken`
Name fresh_name(const Name& base, const std::set<Name>& taken);

// ---------------------------------------------------------------------------
// structural total order (used for canonical sorting); compares trees
// literally, including names.

int compare(const ExprPtr& a, const ExprPtr& b);
int compare(const BoolPtr& a, const BoolPtr& b);
int compare(const ProcPtr& a, const ProcPtr& b);
bool equal(const ProcPtr& a, const ProcPtr& b);

}  // namespace permccs
