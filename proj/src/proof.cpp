#include "permccs/proof.hpp"

#include <algorithm>
#include <numeric>

#include "permccs/print.hpp"

namespace permccs {

// ---------------------------------------------------------------------------
// boolean entailment

namespace {

// one row: sum coeffs*x <= bound
struct Row {
  std::map<Name, long long> coeffs;
  long long bound = 0;
};

bool lin_of(const ExprPtr& e, std::map<Name, long long>& c, long long& k,
            long long sign) {
  switch (e->kind) {
    case Expr::Kind::Lit: {
      long long t;
      if (__builtin_mul_overflow(sign, e->lit, &t)) return false;
      if (__builtin_add_overflow(k, t, &k)) return false;
      return true;
    }
    case Expr::Kind::Var: {
      long long& slot = c[e->var];
      if (__builtin_add_overflow(slot, sign, &slot)) return false;
      return true;
    }
    case Expr::Kind::Add:
      return lin_of(e->lhs, c, k, sign) && lin_of(e->rhs, c, k, sign);
    case Expr::Kind::Sub:
      return lin_of(e->lhs, c, k, sign) && lin_of(e->rhs, c, k, -sign);
  }
  return false;
}

// e1 <= e2 (or its negation) as a row
std::optional<Row> row_of(const ExprPtr& e1, const ExprPtr& e2, bool neg) {
  std::map<Name, long long> c;
  long long k = 0;
  if (!lin_of(e1, c, k, 1) || !lin_of(e2, c, k, -1)) return std::nullopt;
  // e1 - e2 = sum c*x + k ; constraint: sum c*x <= -k
  Row r;
  if (!neg) {
    r.coeffs = std::move(c);
    long long b;
    if (__builtin_sub_overflow(0ll, k, &b)) return std::nullopt;
    r.bound = b;
  } else {
    // !(e1<=e2)  <=>  sum c*x + k >= 1  <=>  sum -c*x <= k - 1
    for (auto& [n, v] : c) r.coeffs[n] = -v;
    long long b;
    if (__builtin_sub_overflow(k, 1ll, &b)) return std::nullopt;
    r.bound = b;
  }
  for (auto it = r.coeffs.begin(); it != r.coeffs.end();)
    it = it->second == 0 ? r.coeffs.erase(it) : std::next(it);
  return r;
}

using Branch = std::vector<Row>;

bool dnf(const BoolPtr& b, bool positive, std::vector<Branch>& out,
         long limit);

bool dnf_cross(const BoolPtr& a, const BoolPtr& b, bool pa, bool pb,
               std::vector<Branch>& out, long limit) {
  std::vector<Branch> xs, ys;
  if (!dnf(a, pa, xs, limit) || !dnf(b, pb, ys, limit)) return false;
  if (static_cast<long>(xs.size() * ys.size()) > limit) return false;
  for (auto& x : xs)
    for (auto& y : ys) {
      Branch br = x;
      br.insert(br.end(), y.begin(), y.end());
      out.push_back(std::move(br));
    }
  return true;
}

bool dnf(const BoolPtr& b, bool positive, std::vector<Branch>& out,
         long limit) {
  switch (b->kind) {
    case BoolExpr::Kind::Leq: {
      auto r = row_of(b->e1, b->e2, !positive);
      if (!r) return false;
      out.push_back({*r});
      return true;
    }
    case BoolExpr::Kind::Not:
      return dnf(b->b1, !positive, out, limit);
    case BoolExpr::Kind::And: {
      if (positive) return dnf_cross(b->b1, b->b2, true, true, out, limit);
      std::vector<Branch> xs, ys;
      if (!dnf(b->b1, false, xs, limit) || !dnf(b->b2, false, ys, limit))
        return false;
      if (static_cast<long>(xs.size() + ys.size()) > limit) return false;
      out.insert(out.end(), xs.begin(), xs.end());
      out.insert(out.end(), ys.begin(), ys.end());
      return true;
    }
  }
  return false;
}

long long llgcd(long long a, long long b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

long long floordiv(long long a, long long b) {  // b > 0
  long long q = a / b, r = a % b;
  return r != 0 && a < 0 ? q - 1 : q;
}

// gcd tightening; returns false when the row is a plain contradiction
bool tighten(Row& r, bool& contradiction) {
  contradiction = false;
  if (r.coeffs.empty()) {
    contradiction = r.bound < 0;
    return true;
  }
  long long g = 0;
  for (auto& [n, v] : r.coeffs) g = llgcd(g, v);
  if (g > 1) {
    for (auto& [n, v] : r.coeffs) v /= g;
    r.bound = floordiv(r.bound, g);
  }
  return true;
}

enum class FmOutcome { Infeasible, Unknown };

// Fourier-Motzkin with integer gcd tightening; proves infeasibility over
// the integers, never feasibility.
FmOutcome fm_infeasible(Branch rows) {
  constexpr size_t kPoolCap = 20000;
  while (true) {
    bool contra = false;
    Branch next;
    for (auto& r : rows) {
      Row t = r;
      bool c;
      tighten(t, c);
      if (c) return FmOutcome::Infeasible;
      if (!t.coeffs.empty()) next.push_back(std::move(t));
    }
    rows = std::move(next);
    if (rows.empty()) return FmOutcome::Unknown;  // trivially feasible

    // pick the variable minimizing the upper*lower product
    std::map<Name, std::pair<long, long>> occ;
    for (auto& r : rows)
      for (auto& [n, v] : r.coeffs)
        (v > 0 ? occ[n].first : occ[n].second)++;
    Name var;
    long best = -1;
    for (auto& [n, ul] : occ) {
      long score = ul.first * ul.second + ul.first + ul.second;
      if (best < 0 || score < best) {
        best = score;
        var = n;
      }
    }

    Branch uppers, lowers, rest;
    for (auto& r : rows) {
      auto it = r.coeffs.find(var);
      if (it == r.coeffs.end())
        rest.push_back(r);
      else if (it->second > 0)
        uppers.push_back(r);
      else
        lowers.push_back(r);
    }
    Branch pool = rest;
    for (auto& u : uppers) {
      long long a = u.coeffs.at(var);
      for (auto& l : lowers) {
        long long bneg = -l.coeffs.at(var);  // > 0
        Row combo;
        bool overflow = false;
        auto addin = [&](const Row& src, long long mult) {
          for (auto& [n, v] : src.coeffs) {
            if (n == var) continue;
            long long t;
            if (__builtin_mul_overflow(v, mult, &t)) { overflow = true; return; }
            long long& slot = combo.coeffs[n];
            if (__builtin_add_overflow(slot, t, &slot)) { overflow = true; return; }
          }
          long long tb;
          if (__builtin_mul_overflow(src.bound, mult, &tb)) { overflow = true; return; }
          if (__builtin_add_overflow(combo.bound, tb, &combo.bound)) { overflow = true; return; }
        };
        addin(u, bneg);
        if (!overflow) addin(l, a);
        if (overflow) return FmOutcome::Unknown;
        for (auto it = combo.coeffs.begin(); it != combo.coeffs.end();)
          it = it->second == 0 ? combo.coeffs.erase(it) : std::next(it);
        pool.push_back(std::move(combo));
        if (pool.size() > kPoolCap) return FmOutcome::Unknown;
      }
    }
    if (uppers.empty() || lowers.empty()) {
      // var is unbounded on one side: drop its rows entirely
    }
    rows = std::move(pool);
    if (rows.empty()) return FmOutcome::Unknown;
    bool progress = false;
    for (auto& r : rows)
      if (r.coeffs.empty() && r.bound < 0) return FmOutcome::Infeasible;
    // recompute variable set; if no variables remain we are done next loop
    bool any_var = false;
    for (auto& r : rows)
      if (!r.coeffs.empty()) any_var = true;
    if (!any_var) {
      for (auto& r : rows)
        if (r.bound < 0) return FmOutcome::Infeasible;
      return FmOutcome::Unknown;
    }
    (void)progress;
  }
}

bool frontend_valid(const BoolPtr& b1, const BoolPtr& b2, long dnf_limit) {
  // b1 && !b2 must be infeasible on every branch
  std::vector<Branch> branches;
  if (!dnf_cross(b1, b2, true, false, branches, dnf_limit)) return false;
  for (auto& br : branches)
    if (fm_infeasible(br) != FmOutcome::Infeasible) return false;
  return true;
}

}  // namespace

EntailResult bool_entails(const BoolPtr& b1, const BoolPtr& b2,
                          const EntailConfig& cfg) {
  std::vector<Name> vars;
  {
    auto v1 = free_vars(b1);
    for (auto& v : free_vars(b2)) v1.insert(v);
    vars.assign(v1.begin(), v1.end());
  }
  if (static_cast<int>(vars.size()) > cfg.var_cap)
    throw TooManyVariables("entailment over " + std::to_string(vars.size()) +
                           " variables exceeds the cap");

  EntailResult r;
  r.bound = cfg.bound;
  if (frontend_valid(b1, b2, cfg.dnf_limit)) {
    r.verdict = EntailVerdict::Valid;
    return r;
  }

  // refutation scan over [-B, B]^n, small values first
  std::vector<Value> order;
  order.push_back(0);
  for (Value v = 1; v <= cfg.bound; ++v) {
    order.push_back(v);
    order.push_back(-v);
  }
  size_t n = vars.size();
  std::vector<size_t> idx(n, 0);
  long tried = 0;
  bool exhaustive = true;
  if (n == 0) {
    bool t1 = eval_bool(b1), t2 = eval_bool(b2);
    if (t1 && !t2) {
      r.verdict = EntailVerdict::Refuted;
      return r;
    }
  } else {
    while (true) {
      if (tried >= cfg.scan_limit) {
        exhaustive = false;
        break;
      }
      ++tried;
      Subst sigma;
      for (size_t i = 0; i < n; ++i)
        sigma.map[vars[i]] = Expr::mk_lit(order[idx[i]]);
      bool t1 = false, t2 = true;
      try {
        t1 = eval_bool(b1, sigma);
        if (t1) t2 = eval_bool(b2, sigma);
      } catch (const EvalError&) {
        t1 = false;  // overflow at this point; skip it
      }
      if (t1 && !t2) {
        r.verdict = EntailVerdict::Refuted;
        r.witness = sigma;
        return r;
      }
      size_t i = 0;
      for (; i < n; ++i) {
        if (++idx[i] < order.size()) break;
        idx[i] = 0;
      }
      if (i == n) break;
    }
  }
  r.verdict = EntailVerdict::BoundedValid;
  r.exhaustive = exhaustive;
  return r;
}

// ---------------------------------------------------------------------------
// formula implication modulo the (*, emp) monoid with any-absorption

bool formula_implies(const FormulaPtr& phi, const FormulaPtr& psi) {
  auto xs = formula_atoms(phi);
  auto ys = formula_atoms(psi);
  std::vector<bool> used(xs.size(), false);
  int psi_any = 0;
  for (auto& y : ys)
    if (y->kind == Formula::Kind::Any) ++psi_any;
  int phi_any = 0;
  for (auto& x : xs)
    if (x->kind == Formula::Kind::Any) ++phi_any;
  if (phi_any > psi_any) return false;  // `any` can only weaken to `any`
  // match psi's concrete atoms against phi's
  for (auto& y : ys) {
    if (y->kind == Formula::Kind::Any) continue;
    bool found = false;
    for (size_t i = 0; i < xs.size(); ++i) {
      if (used[i] || xs[i]->kind == Formula::Kind::Any) continue;
      if (compare(xs[i], y) == 0) {
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  // leftovers of phi must be absorbed by some `any` on the psi side
  size_t leftovers = 0;
  for (size_t i = 0; i < xs.size(); ++i)
    if (!used[i] && xs[i]->kind != Formula::Kind::Any) ++leftovers;
  if (leftovers > 0 && psi_any == 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// rules

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::lNil: return "lNil";
    case Rule::lFls: return "lFls";
    case Rule::lBlk: return "lBlk";
    case Rule::lOut: return "lOut";
    case Rule::lIn: return "lIn";
    case Rule::lIf: return "lIf";
    case Rule::lDef: return "lDef";
    case Rule::lPar: return "lPar";
    case Rule::lSpl: return "lSpl";
    case Rule::lRes: return "lRes";
    case Rule::lLcl: return "lLcl";
    case Rule::lInst: return "lInst";
    case Rule::lSub: return "lSub";
    case Rule::lImp: return "lImp";
    case Rule::lRen: return "lRen";
    case Rule::lCut: return "lCut";
    case Rule::lSep: return "lSep";
    case Rule::lSepSt: return "lSepSt";
    case Rule::lOutD: return "lOutD";
    case Rule::lInD: return "lInD";
    case Rule::lFrm: return "lFrm";
    case Rule::lFrmSt: return "lFrmSt";
  }
  return "?";
}

std::optional<Rule> rule_from_name(const std::string& s) {
  static const std::map<std::string, Rule> m = {
      {"lNil", Rule::lNil},   {"lFls", Rule::lFls},   {"lBlk", Rule::lBlk},
      {"lOut", Rule::lOut},   {"lIn", Rule::lIn},     {"lIf", Rule::lIf},
      {"lDef", Rule::lDef},   {"lPar", Rule::lPar},   {"lSpl", Rule::lSpl},
      {"lRes", Rule::lRes},   {"lLcl", Rule::lLcl},   {"lInst", Rule::lInst},
      {"lSub", Rule::lSub},   {"lImp", Rule::lImp},   {"lRen", Rule::lRen},
      {"lCut", Rule::lCut},   {"lSep", Rule::lSep},   {"lSepSt", Rule::lSepSt},
      {"lOutD", Rule::lOutD}, {"lInD", Rule::lInD},   {"lFrm", Rule::lFrm},
      {"lFrmSt", Rule::lFrmSt},
  };
  auto it = m.find(s);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

namespace {

struct PLeaf {
  PermSet perms;
  ProcPtr proc;
};

struct PView {
  std::vector<Name> binders;
  std::vector<PLeaf> leaves;
};

void pview_rec(const SysPtr& s, PView& v) {
  switch (s->kind) {
    case System::Kind::Leaf:
      v.leaves.push_back({s->perms, s->proc});
      return;
    case System::Kind::Par:
      pview_rec(s->left, v);
      pview_rec(s->right, v);
      return;
    case System::Kind::New:
      v.binders.push_back(s->chan);
      pview_rec(s->body, v);
      return;
  }
}

PView pview(const SysPtr& s) {
  PView v;
  pview_rec(s, v);
  return v;
}

SysPtr pview_rebuild(const std::vector<Name>& binders,
                     const std::vector<PLeaf>& leaves) {
  SysPtr body;
  if (leaves.empty()) {
    body = System::mk_leaf(PermSet{}, Process::mk_nil());
  } else {
    body = System::mk_leaf(leaves.back().perms, leaves.back().proc);
    for (size_t i = leaves.size() - 1; i-- > 0;)
      body = System::mk_par(System::mk_leaf(leaves[i].perms, leaves[i].proc),
                            body);
  }
  return System::mk_new(binders, body);
}

// the single atom a leaf body is structurally equivalent to, if any
std::optional<ProcPtr> leaf_atom(const ProcPtr& p, const DefTable& defs) {
  std::vector<Name> binders;
  std::vector<ProcPtr> atoms;
  std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
    switch (q->kind) {
      case Process::Kind::Nil:
        return;
      case Process::Kind::Par:
        walk(q->left);
        walk(q->right);
        return;
      case Process::Kind::New:
        binders.push_back(q->chan);
        walk(q->cont);
        return;
      default:
        atoms.push_back(q);
    }
  };
  walk(p);
  if (atoms.size() != 1) return std::nullopt;
  for (auto& b : binders)
    if (free_chans(atoms[0], defs).count(b)) return std::nullopt;
  return atoms[0];
}

// open-expression unfolding for lDef
ProcPtr unfold_call_open(const Process& call, const DefTable& defs) {
  const Def& d = defs.at(call.defname);
  if (d.params.size() != call.args.size())
    throw std::runtime_error("call arity mismatch for " + call.defname);
  ProcPtr body = substitute(d.body, Subst::of_exprs(d.params, call.args));
  auto eff = call_effective_map(call, defs);
  std::vector<std::pair<Name, Name>> pairs;
  for (auto& [formal, actual] : eff)
    if (formal != actual) pairs.emplace_back(actual, formal);
  return rename_channels(body, pairs, defs);
}

struct StepCtx {
  const DefTable& defs;
  const CheckConfig& cfg;
  const Sequent& C;
  const ProofNode& node;
  std::vector<Sequent>& premises;
  std::optional<RuleError> error;
  std::string path;

  std::nullopt_t fail(const std::string& reason) {
    error = RuleError{path, rule_name(node.rule), reason};
    return std::nullopt;
  }

  bool entails(const BoolPtr& a, const BoolPtr& b) {
    auto r = bool_entails(a, b, cfg.entail);
    if (r.verdict == EntailVerdict::Valid) return true;
    if (r.verdict == EntailVerdict::BoundedValid && cfg.accept_bounded)
      return true;
    return false;
  }
};

// locate the system leaf a rule acts on
std::optional<size_t> locate_leaf(StepCtx& cx, const PView& v,
                                  const std::function<bool(const PLeaf&)>& ok,
                                  const char* what) {
  if (cx.node.inst.leaf) {
    size_t i = static_cast<size_t>(*cx.node.inst.leaf);
    if (i >= v.leaves.size()) return cx.fail("leaf index out of range");
    if (!ok(v.leaves[i])) return cx.fail(std::string("leaf is not ") + what);
    return i;
  }
  std::optional<size_t> found;
  for (size_t i = 0; i < v.leaves.size(); ++i) {
    if (ok(v.leaves[i])) {
      if (found) return cx.fail(std::string("ambiguous ") + what +
                                "; give :leaf");
      found = i;
    }
  }
  if (!found) return cx.fail(std::string("no leaf is ") + what);
  return found;
}

// split a view into S-side (indices) and T-side (rest); binders go with the
// side that uses them
std::optional<std::pair<SysPtr, SysPtr>> split_system(
    StepCtx& cx, const PView& v, const std::vector<int>& left) {
  std::set<size_t> li;
  for (int i : left) {
    if (i < 0 || static_cast<size_t>(i) >= v.leaves.size())
      return static_cast<void>(cx.fail("bad :left index")), std::nullopt;
    li.insert(static_cast<size_t>(i));
  }
  if (li.empty() || li.size() == v.leaves.size())
    return static_cast<void>(cx.fail("both sides of the split must be nonempty")),
           std::nullopt;
  std::vector<PLeaf> ls, rs;
  for (size_t i = 0; i < v.leaves.size(); ++i)
    (li.count(i) ? ls : rs).push_back(v.leaves[i]);
  auto uses = [&](const std::vector<PLeaf>& side, const Name& b) {
    for (auto& leaf : side)
      if (leaf.perms.names().count(b) ||
          free_chans(leaf.proc, cx.defs).count(b))
        return true;
    return false;
  };
  std::vector<Name> bl, br;
  for (auto& b : v.binders) {
    bool ul = uses(ls, b), ur = uses(rs, b);
    if (ul && ur)
      return static_cast<void>(cx.fail("restricted channel " + b +
                                       " is shared across the split")),
             std::nullopt;
    if (ul) bl.push_back(b);
    if (ur) br.push_back(b);
  }
  return std::make_pair(pview_rebuild(bl, ls), pview_rebuild(br, rs));
}

FormulaPtr remove_atom(const FormulaPtr& f, const FormulaPtr& atom,
                       bool& removed) {
  auto xs = formula_atoms(f);
  std::vector<FormulaPtr> kept;
  removed = false;
  for (auto& x : xs) {
    if (!removed && compare(x, atom) == 0) {
      removed = true;
      continue;
    }
    kept.push_back(x);
  }
  return Formula::mk_sep(kept);
}

}  // namespace

std::optional<RuleError> check_step(const ProofNode& node,
                                    const Sequent& conclusion,
                                    const DefTable& defs,
                                    const CheckConfig& cfg,
                                    std::vector<Sequent>& premises,
                                    const std::string& path) {
  StepCtx cx{defs, cfg, conclusion, node, premises, std::nullopt, path};
  const Sequent& C = conclusion;
  PView v = pview(C.sys);

  auto is_out_atom = [&](const PLeaf& l) {
    auto a = leaf_atom(l.proc, defs);
    return a && (*a)->kind == Process::Kind::Out;
  };

  switch (node.rule) {
    case Rule::lNil: {
      auto c = canon_system(C.sys, defs);
      PView cv = pview(c.norm);
      if (!cv.binders.empty() || cv.leaves.size() != 1 ||
          cv.leaves[0].proc->kind != Process::Kind::Nil) {
        cx.fail("system is not a single inert leaf");
        break;
      }
      if (!formula_ac_equal(C.pre, C.post))
        cx.fail("precondition and postcondition differ");
      break;
    }

    case Rule::lFls: {
      if (!cx.entails(C.cond, BoolExpr::mk_false()))
        cx.fail("boolean condition is not unsatisfiable");
      break;
    }

    case Rule::lOut:
    case Rule::lOutD: {
      if (!v.binders.empty() || v.leaves.size() != 1 ||
          !is_out_atom(v.leaves[0])) {
        cx.fail("system is not a single output leaf");
        break;
      }
      ProcPtr a = *leaf_atom(v.leaves[0].proc, defs);
      if (!formula_ac_equal(C.pre, Formula::mk_emp())) {
        cx.fail("precondition is not emp");
        break;
      }
      auto atoms = formula_atoms(C.post);
      if (atoms.size() != 1 || atoms[0]->kind != Formula::Kind::State ||
          atoms[0]->chan != a->chan) {
        cx.fail("postcondition is not a data assertion on " + a->chan);
        break;
      }
      if (!C.env.has(a->chan) ||
          !C.env.at(a->chan).subset_of(v.leaves[0].perms)) {
        cx.fail("leaf does not own env(" + a->chan + ")");
        break;
      }
      if (atoms[0]->args.size() != a->args.size()) {
        cx.fail("output arity differs from the assertion");
        break;
      }
      if (node.rule == Rule::lOut) {
        for (size_t i = 0; i < a->args.size(); ++i)
          if (compare(a->args[i], atoms[0]->args[i]) != 0) {
            cx.fail("output expressions differ from the assertion");
            break;
          }
      } else {
        BoolPtr eq = BoolExpr::mk_true();
        for (size_t i = 0; i < a->args.size(); ++i)
          eq = BoolExpr::mk_and(eq,
                                BoolExpr::mk_eq(a->args[i], atoms[0]->args[i]));
        if (!cx.entails(C.cond, eq))
          cx.fail("cannot derive equality of output and assertion data");
      }
      break;
    }

    case Rule::lBlk: {
      if (!v.binders.empty() || v.leaves.size() != 1) {
        cx.fail("system is not a single input leaf");
        break;
      }
      auto a = leaf_atom(v.leaves[0].proc, defs);
      if (!a || (*a)->kind != Process::Kind::In) {
        cx.fail("system is not a single input leaf");
        break;
      }
      if (!v.leaves[0].perms.contains(perm_in((*a)->chan))) {
        cx.fail("leaf does not own " + (*a)->chan + "?");
        break;
      }
      if (!formula_ac_equal(C.pre, Formula::mk_emp())) {
        cx.fail("precondition is not emp");
        break;
      }
      if (!formula_ac_equal(C.post, Formula::mk_blk((*a)->chan)))
        cx.fail("postcondition is not blk " + (*a)->chan);
      break;
    }

    case Rule::lIn:
    case Rule::lInD: {
      if (!node.inst.chan) {
        cx.fail("lIn needs :chan");
        break;
      }
      Name c = *node.inst.chan;
      if (!C.env.has(c)) {
        cx.fail("environment has no entry for " + c);
        break;
      }
      const PermSet& guard = C.env.at(c);
      auto idx = locate_leaf(
          cx, v,
          [&](const PLeaf& l) {
            auto a = leaf_atom(l.proc, defs);
            return a && (*a)->kind == Process::Kind::In && (*a)->chan == c &&
                   l.perms.contains(perm_in(c));
          },
          ("an input on " + c).c_str());
      if (!idx) break;
      const PLeaf& leaf = v.leaves[*idx];
      if (!leaf.perms.disjoint(guard)) {
        cx.fail("leaf permissions overlap env(" + c + ")");
        break;
      }
      ProcPtr a = *leaf_atom(leaf.proc, defs);
      // the consumed data assertion
      std::vector<ExprPtr> args = node.inst.args;
      if (args.empty() && !a->params.empty()) {
        // infer from the precondition when there is exactly one candidate
        FormulaPtr cand;
        for (auto& at : formula_atoms(C.pre)) {
          if (at->kind == Formula::Kind::State && at->chan == c) {
            if (cand) {
              cand = nullptr;
              break;
            }
            cand = at;
          }
        }
        if (cand) args = cand->args;
      }
      if (args.size() != a->params.size()) {
        cx.fail("message arity mismatch on " + c);
        break;
      }
      bool removed = false;
      FormulaPtr rest =
          remove_atom(C.pre, Formula::mk_state(c, args), removed);
      if (!removed) {
        cx.fail("precondition has no matching data assertion on " + c);
        break;
      }
      Sequent P = C;
      P.pre = rest;
      std::vector<PLeaf> ls = v.leaves;
      ls[*idx] = {leaf.perms.unite(guard),
                  substitute(a->cont, Subst::of_exprs(a->params, args))};
      P.sys = pview_rebuild(v.binders, ls);
      premises.push_back(P);
      break;
    }

    case Rule::lIf: {
      auto idx = locate_leaf(
          cx, v,
          [&](const PLeaf& l) {
            auto a = leaf_atom(l.proc, defs);
            return a && (*a)->kind == Process::Kind::If;
          },
          "a conditional");
      if (!idx) break;
      ProcPtr a = *leaf_atom(v.leaves[*idx].proc, defs);
      Sequent thenP = C, elseP = C;
      thenP.cond = BoolExpr::mk_and(C.cond, a->guard);
      elseP.cond = BoolExpr::mk_and(C.cond, BoolExpr::mk_not(a->guard));
      std::vector<PLeaf> lt = v.leaves, le = v.leaves;
      lt[*idx].proc = a->left;
      le[*idx].proc = a->right;
      thenP.sys = pview_rebuild(v.binders, lt);
      elseP.sys = pview_rebuild(v.binders, le);
      premises.push_back(thenP);
      premises.push_back(elseP);
      break;
    }

    case Rule::lDef: {
      auto idx = locate_leaf(
          cx, v,
          [&](const PLeaf& l) {
            auto a = leaf_atom(l.proc, defs);
            return a && (*a)->kind == Process::Kind::Call;
          },
          "a call");
      if (!idx) break;
      ProcPtr a = *leaf_atom(v.leaves[*idx].proc, defs);
      Sequent P = C;
      std::vector<PLeaf> ls = v.leaves;
      try {
        ls[*idx].proc = unfold_call_open(*a, defs);
      } catch (const std::exception& e) {
        cx.fail(e.what());
        break;
      }
      P.sys = pview_rebuild(v.binders, ls);
      premises.push_back(P);
      break;
    }

    case Rule::lPar:
    case Rule::lCut:
    case Rule::lSep:
    case Rule::lSepSt: {
      auto split = split_system(cx, v, node.inst.left_leaves);
      if (!split) break;
      auto [ssys, tsys] = *split;

      if (node.rule == Rule::lCut) {
        if (!node.inst.cut) {
          cx.fail("lCut needs :mid");
          break;
        }
        Sequent P1 = C, P2 = C;
        P1.sys = ssys;
        P1.post = node.inst.cut;
        P2.sys = tsys;
        P2.pre = node.inst.cut;
        premises.push_back(P1);
        premises.push_back(P2);
        break;
      }

      FormulaPtr pre1 = node.inst.pre1, pre2 = node.inst.pre2;
      FormulaPtr post1 = node.inst.post1, post2 = node.inst.post2;
      if (!pre1 || !pre2 || !post1 || !post2) {
        cx.fail("parallel rules need :pre1 :pre2 :post1 :post2");
        break;
      }
      if (!formula_ac_equal(C.pre, Formula::mk_sep(pre1, pre2))) {
        cx.fail("precondition does not split as pre1 * pre2");
        break;
      }
      if (!formula_ac_equal(C.post, Formula::mk_sep(post1, post2))) {
        cx.fail("postcondition does not split as post1 * post2");
        break;
      }
      if (node.rule == Rule::lPar) {
        if (!node.inst.cut) {
          cx.fail("lPar needs the cut formula :cut");
          break;
        }
        if (!formulas_separate(pre2, node.inst.cut)) {
          cx.fail("pre2 and the cut formula are not separate");
          break;
        }
        if (!formulas_separate(post1, post2)) {
          cx.fail("post1 and post2 are not separate");
          break;
        }
        Sequent P1 = C, P2 = C;
        P1.sys = ssys;
        P1.pre = pre1;
        P1.post = Formula::mk_sep(post1, node.inst.cut);
        P2.sys = tsys;
        P2.pre = Formula::mk_sep(pre2, node.inst.cut);
        P2.post = post2;
        premises.push_back(P1);
        premises.push_back(P2);
        break;
      }
      if (node.rule == Rule::lSep) {
        if (!formulas_separate(post1, post2)) {
          cx.fail("post1 and post2 are not separate");
          break;
        }
      } else {  // lSepSt
        if (!is_state_formula(pre1) || !is_state_formula(pre2) ||
            !is_state_formula(post1) || !is_state_formula(post2)) {
          cx.fail("lSepSt needs state formulas");
          break;
        }
      }
      Sequent P1 = C, P2 = C;
      P1.sys = ssys;
      P1.pre = pre1;
      P1.post = post1;
      P2.sys = tsys;
      P2.pre = pre2;
      P2.post = post2;
      premises.push_back(P1);
      premises.push_back(P2);
      break;
    }

    case Rule::lSpl: {
      auto idx = locate_leaf(
          cx, v,
          [&](const PLeaf& l) {
            std::vector<ProcPtr> atoms;
            std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
              if (q->kind == Process::Kind::Par) {
                walk(q->left);
                walk(q->right);
              } else if (q->kind != Process::Kind::Nil) {
                atoms.push_back(q);
              }
            };
            walk(l.proc);
            return atoms.size() >= 2;
          },
          "a parallel body");
      if (!idx) break;
      const PLeaf& leaf = v.leaves[*idx];
      std::vector<ProcPtr> atoms;
      std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
        if (q->kind == Process::Kind::Par) {
          walk(q->left);
          walk(q->right);
        } else if (q->kind != Process::Kind::Nil) {
          atoms.push_back(q);
        }
      };
      walk(leaf.proc);
      std::set<size_t> la;
      for (int i : node.inst.left_atoms) {
        if (i < 0 || static_cast<size_t>(i) >= atoms.size()) {
          cx.fail("bad :left-atoms index");
          break;
        }
        la.insert(static_cast<size_t>(i));
      }
      if (cx.error) break;
      if (la.empty() || la.size() == atoms.size()) {
        cx.fail("both halves of an lSpl split must be nonempty");
        break;
      }
      PermSet e1 = node.inst.left_perms.value_or(PermSet{});
      if (!e1.subset_of(leaf.perms)) {
        cx.fail(":left-perms is not a subset of the leaf permissions");
        break;
      }
      PermSet e2 = leaf.perms.minus(e1);
      std::vector<ProcPtr> pa, pb;
      for (size_t i = 0; i < atoms.size(); ++i)
        (la.count(i) ? pa : pb).push_back(atoms[i]);
      auto fold = [](const std::vector<ProcPtr>& as) {
        ProcPtr r = as.back();
        for (size_t i = as.size() - 1; i-- > 0;) r = Process::mk_par(as[i], r);
        return r;
      };
      Sequent P = C;
      std::vector<PLeaf> ls;
      for (size_t i = 0; i < v.leaves.size(); ++i) {
        if (i == *idx) {
          ls.push_back({e1, fold(pa)});
          ls.push_back({e2, fold(pb)});
        } else {
          ls.push_back(v.leaves[i]);
        }
      }
      P.sys = pview_rebuild(v.binders, ls);
      premises.push_back(P);
      break;
    }

    case Rule::lRes: {
      if (node.inst.chans.empty() || !node.inst.env || !node.inst.post) {
        cx.fail("lRes needs :chans, :env and :post");
        break;
      }
      for (auto& c : node.inst.chans)
        if (std::find(v.binders.begin(), v.binders.end(), c) ==
            v.binders.end()) {
          cx.fail("channel " + c + " is not restricted at the top");
          break;
        }
      if (cx.error) break;
      PermEnv want = env_restrict(*node.inst.env, node.inst.chans);
      if (!(want == C.env)) {
        cx.fail("environment is not the restriction of :env");
        break;
      }
      if (!formula_ac_equal(formula_restrict(node.inst.post, node.inst.chans),
                            C.post)) {
        cx.fail("postcondition is not the restriction of :post");
        break;
      }
      std::vector<Name> rest;
      for (auto& b : v.binders)
        if (std::find(node.inst.chans.begin(), node.inst.chans.end(), b) ==
            node.inst.chans.end())
          rest.push_back(b);
      Sequent P = C;
      P.env = *node.inst.env;
      P.post = node.inst.post;
      P.sys = pview_rebuild(rest, v.leaves);
      premises.push_back(P);
      break;
    }

    case Rule::lLcl: {
      auto idx = locate_leaf(
          cx, v,
          [&](const PLeaf& l) {
            std::vector<Name> bs;
            std::vector<ProcPtr> atoms;
            std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
              switch (q->kind) {
                case Process::Kind::Par:
                  walk(q->left);
                  walk(q->right);
                  return;
                case Process::Kind::New:
                  bs.push_back(q->chan);
                  walk(q->cont);
                  return;
                case Process::Kind::Nil:
                  return;
                default:
                  atoms.push_back(q);
              }
            };
            walk(l.proc);
            for (auto& b : bs)
              for (auto& a : atoms)
                if (free_chans(a, defs).count(b)) return true;
            return false;
          },
          "a restricted body");
      if (!idx) break;
      const PLeaf& leaf = v.leaves[*idx];
      // peel one spine binder (the requested one or the outermost)
      std::vector<Name> bs;
      std::vector<ProcPtr> atoms;
      std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
        switch (q->kind) {
          case Process::Kind::Par:
            walk(q->left);
            walk(q->right);
            return;
          case Process::Kind::New:
            bs.push_back(q->chan);
            walk(q->cont);
            return;
          case Process::Kind::Nil:
            return;
          default:
            atoms.push_back(q);
        }
      };
      walk(leaf.proc);
      Name c = node.inst.chan.value_or(bs.front());
      if (std::find(bs.begin(), bs.end(), c) == bs.end()) {
        cx.fail("channel " + c + " is not restricted in the leaf");
        break;
      }
      if (leaf.perms.contains(perm_in(c)) ||
          leaf.perms.contains(perm_out(c))) {
        cx.fail("permissions for " + c + " already present at the leaf");
        break;
      }
      // clash with other top names: rename the binder apart first
      std::set<Name> clash;
      for (auto& b : v.binders) clash.insert(b);
      for (size_t i = 0; i < v.leaves.size(); ++i) {
        if (i == *idx) continue;
        for (auto& n : free_chans(v.leaves[i].proc, defs)) clash.insert(n);
        for (auto& n : v.leaves[i].perms.names()) clash.insert(n);
      }
      std::vector<Name> rest;
      for (auto& b : bs)
        if (b != c) rest.push_back(b);
      ProcPtr inner;
      if (atoms.empty()) {
        inner = Process::mk_nil();
      } else {
        inner = atoms.back();
        for (size_t i = atoms.size() - 1; i-- > 0;)
          inner = Process::mk_par(atoms[i], inner);
      }
      inner = Process::mk_new(rest, inner);
      Name fresh = c;
      if (clash.count(c)) {
        fresh = fresh_name(c, clash);
        inner = rename_channels(inner, {{fresh, c}}, defs);
      }
      PermSet e = leaf.perms;
      e.insert(perm_in(fresh));
      e.insert(perm_out(fresh));
      Sequent P = C;
      std::vector<PLeaf> ls = v.leaves;
      ls[*idx] = {e, inner};
      std::vector<Name> nb = v.binders;
      nb.push_back(fresh);
      P.sys = pview_rebuild(nb, ls);
      premises.push_back(P);
      break;
    }

    case Rule::lInst: {
      if (!node.inst.var || !node.inst.expr || !node.inst.sequent) {
        cx.fail("lInst needs :var, :expr and :sequent");
        break;
      }
      const Sequent& P = *node.inst.sequent;
      Subst sigma;
      sigma.map[*node.inst.var] = node.inst.expr;
      if (!(P.env == C.env)) {
        cx.fail("environments differ");
        break;
      }
      if (compare(subst_bool(P.cond, sigma), C.cond) != 0) {
        cx.fail("condition is not the instantiated premise condition");
        break;
      }
      if (!formula_ac_equal(subst_formula(P.pre, sigma), C.pre) ||
          !formula_ac_equal(subst_formula(P.post, sigma), C.post)) {
        cx.fail("formulas are not the instantiated premise formulas");
        break;
      }
      if (!sys_struct_eq(subst_system(P.sys, sigma), C.sys, defs)) {
        cx.fail("system is not the instantiated premise system");
        break;
      }
      premises.push_back(P);
      break;
    }

    case Rule::lSub: {
      if (!node.inst.var || !node.inst.expr) {
        cx.fail("lSub needs :var and :expr");
        break;
      }
      BoolPtr eq = BoolExpr::mk_eq(Expr::mk_var(*node.inst.var),
                                   node.inst.expr);
      if (!cx.entails(C.cond, eq)) {
        cx.fail("condition does not entail " + *node.inst.var + " = " +
                print(node.inst.expr));
        break;
      }
      Subst sigma;
      sigma.map[*node.inst.var] = node.inst.expr;
      Sequent P = C;
      P.pre = subst_formula(C.pre, sigma);
      P.post = subst_formula(C.post, sigma);
      P.sys = subst_system(C.sys, sigma);
      premises.push_back(P);
      break;
    }

    case Rule::lImp: {
      if (!node.inst.sequent) {
        cx.fail("lImp needs :sequent");
        break;
      }
      const Sequent& P = *node.inst.sequent;
      if (!(P.env == C.env)) {
        cx.fail("environments differ");
        break;
      }
      if (!cx.entails(C.cond, P.cond)) {
        cx.fail("condition does not entail the premise condition");
        break;
      }
      if (!formula_implies(C.pre, P.pre)) {
        cx.fail("precondition does not imply the premise precondition");
        break;
      }
      if (!formula_implies(P.post, C.post)) {
        cx.fail("premise postcondition does not imply the postcondition");
        break;
      }
      if (!sys_struct_eq(P.sys, C.sys, defs)) {
        cx.fail("systems are not structurally equivalent");
        break;
      }
      premises.push_back(P);
      break;
    }

    case Rule::lRen: {
      if (!node.inst.from || !node.inst.to || !node.inst.sequent) {
        cx.fail("lRen needs :from, :to and :sequent");
        break;
      }
      const Sequent& P = *node.inst.sequent;
      Name c = *node.inst.from, d = *node.inst.to;
      std::set<Name> fn;
      for (auto& [ch, e] : P.env.map) {
        fn.insert(ch);
        for (auto& n : e.names()) fn.insert(n);
      }
      for (auto& n : formula_chans(P.pre)) fn.insert(n);
      for (auto& n : formula_chans(P.post)) fn.insert(n);
      for (auto& n : free_chans(P.sys, defs)) fn.insert(n);
      if (fn.count(d)) {
        cx.fail("renaming target " + d + " is not fresh for the premise");
        break;
      }
      if (!(rename_env(P.env, c, d) == C.env)) {
        cx.fail("environment is not the renamed premise environment");
        break;
      }
      if (compare(P.cond, C.cond) != 0) {
        cx.fail("boolean condition changed under renaming");
        break;
      }
      if (!formula_ac_equal(rename_formula(P.pre, c, d), C.pre) ||
          !formula_ac_equal(rename_formula(P.post, c, d), C.post)) {
        cx.fail("formulas are not the renamed premise formulas");
        break;
      }
      if (!sys_struct_eq(rename_system(P.sys, c, d, defs), C.sys, defs)) {
        cx.fail("system is not the renamed premise system");
        break;
      }
      premises.push_back(P);
      break;
    }

    case Rule::lFrm:
    case Rule::lFrmSt: {
      if (!node.inst.frame || !node.inst.pre || !node.inst.post) {
        cx.fail("frame rules need :frame, :pre and :post");
        break;
      }
      if (!formula_ac_equal(C.pre,
                            Formula::mk_sep(node.inst.pre, node.inst.frame))) {
        cx.fail("precondition does not split as pre * frame");
        break;
      }
      if (!formula_ac_equal(
              C.post, Formula::mk_sep(node.inst.post, node.inst.frame))) {
        cx.fail("postcondition does not split as post * frame");
        break;
      }
      if (node.rule == Rule::lFrm) {
        if (!formulas_separate(node.inst.post, node.inst.frame)) {
          cx.fail("postcondition and frame are not separate");
          break;
        }
      } else {
        if (!is_state_formula(node.inst.pre) ||
            !is_state_formula(node.inst.post) ||
            !is_state_formula(node.inst.frame)) {
          cx.fail("lFrmSt needs state formulas");
          break;
        }
      }
      Sequent P = C;
      P.pre = node.inst.pre;
      P.post = node.inst.post;
      premises.push_back(P);
      break;
    }
  }

  return cx.error;
}

namespace {

void check_rec(const ProofNode& node, const Sequent& concl,
               const DefTable& defs, const CheckConfig& cfg,
               const std::string& path, std::vector<RuleError>& errors) {
  node.conclusion = std::make_shared<Sequent>(concl);
  std::vector<Sequent> premises;
  auto err = check_step(node, concl, defs, cfg, premises, path);
  if (err) {
    errors.push_back(*err);
    return;
  }
  if (premises.size() != node.children.size()) {
    errors.push_back(
        {path, rule_name(node.rule),
         "rule has " + std::to_string(premises.size()) + " premise(s) but " +
             std::to_string(node.children.size()) + " subproof(s)"});
    return;
  }
  for (size_t i = 0; i < premises.size(); ++i) {
    std::string child = path.empty() ? std::to_string(i)
                                     : path + "." + std::to_string(i);
    check_rec(node.children[i], premises[i], defs, cfg, child, errors);
  }
}

}  // namespace

CheckResult check_proof(const ProofScript& script, const CheckConfig& cfg) {
  CheckResult r;
  r.root = script.root;
  check_rec(script.tree, script.root, script.defs, cfg, "", r.errors);
  r.ok = r.errors.empty();
  return r;
}

// ---------------------------------------------------------------------------
// bounded semantic checking

std::optional<SysPtr> context_from_formula(const FormulaPtr& f,
                                           const PermEnv& env) {
  std::vector<SysPtr> leaves;
  for (auto& a : formula_atoms(f)) {
    switch (a->kind) {
      case Formula::Kind::State: {
        PermSet e = env.has(a->chan) ? env.at(a->chan)
                                     : PermSet{perm_out(a->chan)};
        leaves.push_back(System::mk_leaf(e, Process::mk_out(a->chan, a->args)));
        break;
      }
      case Formula::Kind::Blk:
        leaves.push_back(System::mk_leaf(PermSet{perm_in(a->chan)},
                                         Process::mk_in(a->chan, {},
                                                        Process::mk_nil())));
        break;
      case Formula::Kind::Any:
        break;  // the unit satisfies `any`
      default:
        break;
    }
  }
  if (leaves.empty())
    return System::mk_leaf(PermSet{}, Process::mk_nil());
  SysPtr s = leaves.back();
  for (size_t i = leaves.size() - 1; i-- > 0;) {
    auto t = System::try_par(leaves[i], s);
    if (!t) return std::nullopt;
    s = *t;
  }
  return s;
}

SemanticResult sequent_holds_semantically(const Sequent& sq,
                                          const DefTable& defs,
                                          const SemanticSpec& spec) {
  SemanticResult r;
  bool any_unknown = false;
  for (auto& sigma : spec.sigmas) {
    bool live;
    try {
      live = eval_bool(sq.cond, sigma);
    } catch (const EvalError&) {
      continue;
    }
    if (!live) continue;

    FormulaPtr pre = subst_formula(sq.pre, sigma);
    FormulaPtr post = subst_formula(sq.post, sigma);
    SysPtr sys = subst_system(sq.sys, sigma);
    auto ctx = context_from_formula(pre, sq.env);
    if (!ctx) continue;
    auto sat_pre = satisfies(sq.env, *ctx, pre, defs, spec.explore);
    if (sat_pre.verdict != SatVerdict::Sat) continue;
    if (!separate(*ctx, sys)) continue;
    auto composed = System::try_par(*ctx, sys);
    if (!composed) continue;
    ++r.points_checked;
    auto sat_post = satisfies(sq.env, *composed, post, defs, spec.explore);
    if (sat_post.verdict == SatVerdict::Unsat) {
      r.verdict = SemanticVerdict::Counterexample;
      std::string sdesc;
      for (auto& [x, e] : sigma.map) sdesc += x + "=" + print(e) + " ";
      r.detail = "fails at " + sdesc + "with context " + print(*ctx) + ": " +
                 sat_post.detail;
      return r;
    }
    if (sat_post.verdict == SatVerdict::Unknown) any_unknown = true;
  }
  if (r.points_checked == 0 || any_unknown) {
    r.verdict = SemanticVerdict::Unknown;
    r.detail = r.points_checked == 0 ? "no usable sample points"
                                     : "budget exhausted on some points";
    return r;
  }
  r.verdict = SemanticVerdict::BoundedValid;
  return r;
}

SemanticResult process_sequent_holds(const ProcPtr& p, const PermSet& e,
                                     const PermEnv& env, const BoolPtr& cond,
                                     const FormulaPtr& pre,
                                     const FormulaPtr& post,
                                     const DefTable& defs,
                                     const SemanticSpec& spec) {
  Sequent sq{env, cond, pre, System::mk_leaf(e, p), post};
  SemanticResult r = sequent_holds_semantically(sq, defs, spec);
  r.detail = "narrative E=" + print(e) + ", env=" + print(env) +
             (r.detail.empty() ? "" : "; " + r.detail);
  return r;
}

}  // namespace permccs
