#include "permccs/ast.hpp"

#include <algorithm>

namespace permccs {

// ---------------------------------------------------------------------------
// constructors

ExprPtr Expr::mk_lit(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Lit;
  e->lit = v;
  return e;
}
ExprPtr Expr::mk_var(Name x) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->var = std::move(x);
  return e;
}
ExprPtr Expr::mk_add(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Add;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}
ExprPtr Expr::mk_sub(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Sub;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

BoolPtr BoolExpr::mk_leq(ExprPtr a, ExprPtr b) {
  auto r = std::make_shared<BoolExpr>();
  r->kind = Kind::Leq;
  r->e1 = std::move(a);
  r->e2 = std::move(b);
  return r;
}
BoolPtr BoolExpr::mk_not(BoolPtr b) {
  auto r = std::make_shared<BoolExpr>();
  r->kind = Kind::Not;
  r->b1 = std::move(b);
  return r;
}
BoolPtr BoolExpr::mk_and(BoolPtr a, BoolPtr b) {
  auto r = std::make_shared<BoolExpr>();
  r->kind = Kind::And;
  r->b1 = std::move(a);
  r->b2 = std::move(b);
  return r;
}
BoolPtr BoolExpr::mk_eq(ExprPtr a, ExprPtr b) {
  return mk_and(mk_leq(a, b), mk_leq(b, a));
}
BoolPtr BoolExpr::mk_lt(ExprPtr a, ExprPtr b) {
  return mk_not(mk_leq(std::move(b), std::move(a)));
}
BoolPtr BoolExpr::mk_or(BoolPtr a, BoolPtr b) {
  return mk_not(mk_and(mk_not(std::move(a)), mk_not(std::move(b))));
}
BoolPtr BoolExpr::mk_implies(BoolPtr a, BoolPtr b) {
  return mk_or(mk_not(std::move(a)), std::move(b));
}
BoolPtr BoolExpr::mk_true() {
  return mk_leq(Expr::mk_lit(0), Expr::mk_lit(1));
}
BoolPtr BoolExpr::mk_false() {
  return mk_leq(Expr::mk_lit(1), Expr::mk_lit(0));
}

static ProcPtr nil_singleton() {
  static ProcPtr nil = [] {
    auto p = std::make_shared<Process>();
    p->kind = Process::Kind::Nil;
    return p;
  }();
  return nil;
}

ProcPtr Process::mk_out(Name c, std::vector<ExprPtr> args) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Out;
  p->chan = std::move(c);
  p->args = std::move(args);
  return p;
}
ProcPtr Process::mk_in(Name c, std::vector<Name> xs, ProcPtr cont) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::In;
  p->chan = std::move(c);
  p->params = std::move(xs);
  p->cont = std::move(cont);
  return p;
}
ProcPtr Process::mk_if(BoolPtr b, ProcPtr thn, ProcPtr els) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::If;
  p->guard = std::move(b);
  p->left = std::move(thn);
  p->right = std::move(els);
  return p;
}
ProcPtr Process::mk_call(Name def, std::vector<ExprPtr> args,
                         std::vector<std::pair<Name, Name>> renaming) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Call;
  p->defname = std::move(def);
  p->args = std::move(args);
  p->renaming = std::move(renaming);
  return p;
}
ProcPtr Process::mk_nil() { return nil_singleton(); }
ProcPtr Process::mk_par(ProcPtr a, ProcPtr b) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Par;
  p->left = std::move(a);
  p->right = std::move(b);
  return p;
}
ProcPtr Process::mk_new(Name c, ProcPtr body) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::New;
  p->chan = std::move(c);
  p->cont = std::move(body);
  return p;
}
ProcPtr Process::mk_new(const std::vector<Name>& cs, ProcPtr body) {
  ProcPtr r = std::move(body);
  for (auto it = cs.rbegin(); it != cs.rend(); ++it) r = mk_new(*it, r);
  return r;
}

const Def& DefTable::at(const Name& n) const {
  auto it = defs.find(n);
  if (it == defs.end())
    throw std::runtime_error("unknown definition: " + n);
  return it->second;
}

void DefTable::add(const Name& n, std::vector<Name> params, ProcPtr body) {
  Def d;
  d.params = std::move(params);
  d.body = std::move(body);
  defs[n] = std::move(d);
  // Formal channels are the free channels of the body. Calls consult the
  // callee's formal list, so iterate to a fixpoint (recursion makes one
  // pass insufficient).
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& [name, def] : defs) {
      auto fc = free_chans(def.body, *this);
      std::vector<Name> formals(fc.begin(), fc.end());
      if (formals != def.formals) {
        def.formals = std::move(formals);
        changed = true;
      }
    }
  }
}

Subst Subst::of_values(const std::vector<Name>& xs,
                       const std::vector<Value>& vs) {
  if (xs.size() != vs.size())
    throw std::runtime_error("substitution arity mismatch");
  Subst s;
  for (size_t i = 0; i < xs.size(); ++i) s.map[xs[i]] = Expr::mk_lit(vs[i]);
  return s;
}
Subst Subst::of_exprs(const std::vector<Name>& xs,
                      const std::vector<ExprPtr>& es) {
  if (xs.size() != es.size())
    throw std::runtime_error("substitution arity mismatch");
  Subst s;
  for (size_t i = 0; i < xs.size(); ++i) s.map[xs[i]] = es[i];
  return s;
}

// ---------------------------------------------------------------------------
// evaluation

Value checked_add(Value a, Value b) {
  Value r;
  if (__builtin_add_overflow(a, b, &r))
    throw EvalError(EvalErrorKind::Overflow, "integer overflow in +");
  return r;
}
Value checked_sub(Value a, Value b) {
  Value r;
  if (__builtin_sub_overflow(a, b, &r))
    throw EvalError(EvalErrorKind::Overflow, "integer overflow in -");
  return r;
}

Value eval_expr(const ExprPtr& e, const Subst& sigma) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      return e->lit;
    case Expr::Kind::Var: {
      auto it = sigma.map.find(e->var);
      if (it == sigma.map.end())
        throw EvalError(EvalErrorKind::UnboundVariable,
                        "unbound variable: " + e->var);
      return eval_expr(it->second, sigma);
    }
    case Expr::Kind::Add:
      return checked_add(eval_expr(e->lhs, sigma), eval_expr(e->rhs, sigma));
    case Expr::Kind::Sub:
      return checked_sub(eval_expr(e->lhs, sigma), eval_expr(e->rhs, sigma));
  }
  throw std::logic_error("bad expr kind");
}

bool eval_bool(const BoolPtr& b, const Subst& sigma) {
  switch (b->kind) {
    case BoolExpr::Kind::Leq:
      return eval_expr(b->e1, sigma) <= eval_expr(b->e2, sigma);
    case BoolExpr::Kind::Not:
      return !eval_bool(b->b1, sigma);
    case BoolExpr::Kind::And:
      return eval_bool(b->b1, sigma) && eval_bool(b->b2, sigma);
  }
  throw std::logic_error("bad bool kind");
}

std::vector<Value> eval_exprs(const std::vector<ExprPtr>& es,
                              const Subst& sigma) {
  std::vector<Value> vs;
  vs.reserve(es.size());
  for (auto& e : es) vs.push_back(eval_expr(e, sigma));
  return vs;
}

// ---------------------------------------------------------------------------
// free names

static void fv_expr(const ExprPtr& e, std::set<Name>& out) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      return;
    case Expr::Kind::Var:
      out.insert(e->var);
      return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      fv_expr(e->lhs, out);
      fv_expr(e->rhs, out);
      return;
  }
}

std::set<Name> free_vars(const ExprPtr& e) {
  std::set<Name> s;
  fv_expr(e, s);
  return s;
}

static void fv_bool(const BoolPtr& b, std::set<Name>& out) {
  switch (b->kind) {
    case BoolExpr::Kind::Leq:
      fv_expr(b->e1, out);
      fv_expr(b->e2, out);
      return;
    case BoolExpr::Kind::Not:
      fv_bool(b->b1, out);
      return;
    case BoolExpr::Kind::And:
      fv_bool(b->b1, out);
      fv_bool(b->b2, out);
      return;
  }
}

std::set<Name> free_vars(const BoolPtr& b) {
  std::set<Name> s;
  fv_bool(b, s);
  return s;
}

static void fv_proc(const ProcPtr& p, std::set<Name> bound,
                    std::set<Name>& out) {
  switch (p->kind) {
    case Process::Kind::Out:
    case Process::Kind::Call:
      for (auto& e : p->args)
        for (auto& x : free_vars(e))
          if (!bound.count(x)) out.insert(x);
      return;
    case Process::Kind::In: {
      for (auto& x : p->params) bound.insert(x);
      fv_proc(p->cont, bound, out);
      return;
    }
    case Process::Kind::If:
      for (auto& x : free_vars(p->guard))
        if (!bound.count(x)) out.insert(x);
      fv_proc(p->left, bound, out);
      fv_proc(p->right, bound, out);
      return;
    case Process::Kind::Nil:
      return;
    case Process::Kind::Par:
      fv_proc(p->left, bound, out);
      fv_proc(p->right, bound, out);
      return;
    case Process::Kind::New:
      fv_proc(p->cont, bound, out);
      return;
  }
}

std::set<Name> free_vars(const ProcPtr& p) {
  std::set<Name> s;
  fv_proc(p, {}, s);
  return s;
}

std::map<Name, Name> call_effective_map(const Process& call,
                                        const DefTable& defs) {
  const Def& d = defs.at(call.defname);
  std::map<Name, Name> eff;
  for (auto& f : d.formals) eff[f] = f;
  for (auto& [actual, formal] : call.renaming) {
    // renaming of a channel the definition never mentions is a no-op
    if (eff.count(formal)) eff[formal] = actual;
  }
  return eff;
}

static void fn_proc(const ProcPtr& p, const DefTable& defs,
                    std::set<Name> bound, std::set<Name>& out) {
  switch (p->kind) {
    case Process::Kind::Out:
      if (!bound.count(p->chan)) out.insert(p->chan);
      return;
    case Process::Kind::In:
      if (!bound.count(p->chan)) out.insert(p->chan);
      fn_proc(p->cont, defs, bound, out);
      return;
    case Process::Kind::If:
      fn_proc(p->left, defs, bound, out);
      fn_proc(p->right, defs, bound, out);
      return;
    case Process::Kind::Call: {
      if (defs.has(p->defname)) {
        for (auto& [formal, actual] : call_effective_map(*p, defs))
          if (!bound.count(actual)) out.insert(actual);
      } else {
        for (auto& [actual, formal] : p->renaming)
          if (!bound.count(actual)) out.insert(actual);
      }
      return;
    }
    case Process::Kind::Nil:
      return;
    case Process::Kind::Par:
      fn_proc(p->left, defs, bound, out);
      fn_proc(p->right, defs, bound, out);
      return;
    case Process::Kind::New: {
      bound.insert(p->chan);
      fn_proc(p->cont, defs, bound, out);
      return;
    }
  }
}

std::set<Name> free_chans(const ProcPtr& p, const DefTable& defs) {
  std::set<Name> s;
  fn_proc(p, defs, {}, s);
  return s;
}

Name fresh_name(const Name& base, const std::set<Name>& taken) {
  if (!taken.count(base)) return base;
  for (int i = 0;; ++i) {
    Name cand = base + "'" + (i ? std::to_string(i) : "");
    if (i == 0) cand = base + "'";
    if (!taken.count(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// substitution

ExprPtr subst_expr(const ExprPtr& e, const Subst& sigma) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      return e;
    case Expr::Kind::Var: {
      auto it = sigma.map.find(e->var);
      return it == sigma.map.end() ? e : it->second;
    }
    case Expr::Kind::Add:
      return Expr::mk_add(subst_expr(e->lhs, sigma), subst_expr(e->rhs, sigma));
    case Expr::Kind::Sub:
      return Expr::mk_sub(subst_expr(e->lhs, sigma), subst_expr(e->rhs, sigma));
  }
  throw std::logic_error("bad expr kind");
}

BoolPtr subst_bool(const BoolPtr& b, const Subst& sigma) {
  switch (b->kind) {
    case BoolExpr::Kind::Leq:
      return BoolExpr::mk_leq(subst_expr(b->e1, sigma),
                              subst_expr(b->e2, sigma));
    case BoolExpr::Kind::Not:
      return BoolExpr::mk_not(subst_bool(b->b1, sigma));
    case BoolExpr::Kind::And:
      return BoolExpr::mk_and(subst_bool(b->b1, sigma),
                              subst_bool(b->b2, sigma));
  }
  throw std::logic_error("bad bool kind");
}

ProcPtr substitute(const ProcPtr& p, const Subst& sigma) {
  if (sigma.empty()) return p;
  switch (p->kind) {
    case Process::Kind::Out: {
      std::vector<ExprPtr> as;
      for (auto& e : p->args) as.push_back(subst_expr(e, sigma));
      return Process::mk_out(p->chan, std::move(as));
    }
    case Process::Kind::In: {
      // drop shadowed entries; alpha-rename binders that would capture
      Subst inner;
      std::set<Name> shadow(p->params.begin(), p->params.end());
      std::set<Name> imgvars;
      for (auto& [x, e] : sigma.map) {
        if (shadow.count(x)) continue;
        inner.map[x] = e;
        for (auto& v : free_vars(e)) imgvars.insert(v);
      }
      if (inner.empty()) return p;
      std::vector<Name> xs = p->params;
      ProcPtr cont = p->cont;
      bool needs_alpha = false;
      for (auto& x : xs)
        if (imgvars.count(x)) needs_alpha = true;
      if (needs_alpha) {
        std::set<Name> taken = imgvars;
        for (auto& v : free_vars(cont)) taken.insert(v);
        for (auto& x : xs) taken.insert(x);
        Subst ren;
        for (auto& x : xs) {
          if (imgvars.count(x)) {
            Name nx = fresh_name(x, taken);
            taken.insert(nx);
            ren.map[x] = Expr::mk_var(nx);
            x = nx;
          }
        }
        cont = substitute(cont, ren);
      }
      return Process::mk_in(p->chan, std::move(xs), substitute(cont, inner));
    }
    case Process::Kind::If:
      return Process::mk_if(subst_bool(p->guard, sigma),
                            substitute(p->left, sigma),
                            substitute(p->right, sigma));
    case Process::Kind::Call: {
      std::vector<ExprPtr> as;
      for (auto& e : p->args) as.push_back(subst_expr(e, sigma));
      return Process::mk_call(p->defname, std::move(as), p->renaming);
    }
    case Process::Kind::Nil:
      return p;
    case Process::Kind::Par:
      return Process::mk_par(substitute(p->left, sigma),
                             substitute(p->right, sigma));
    case Process::Kind::New:
      return Process::mk_new(p->chan, substitute(p->cont, sigma));
  }
  throw std::logic_error("bad proc kind");
}

// ---------------------------------------------------------------------------
// channel renaming

namespace {

ProcPtr rename_rec(const ProcPtr& p, const std::map<Name, Name>& ren,
                   const DefTable& defs) {
  if (ren.empty()) return p;
  auto tgt = [&](const Name& c) {
    auto it = ren.find(c);
    return it == ren.end() ? c : it->second;
  };
  switch (p->kind) {
    case Process::Kind::Out:
      return Process::mk_out(tgt(p->chan), p->args);
    case Process::Kind::In:
      return Process::mk_in(tgt(p->chan), p->params,
                            rename_rec(p->cont, ren, defs));
    case Process::Kind::If:
      return Process::mk_if(p->guard, rename_rec(p->left, ren, defs),
                            rename_rec(p->right, ren, defs));
    case Process::Kind::Call: {
      if (!defs.has(p->defname)) {
        auto pairs = p->renaming;
        for (auto& [a, f] : pairs) a = tgt(a);
        return Process::mk_call(p->defname, p->args, std::move(pairs));
      }
      // compose the renaming with the call's effective map
      auto eff = call_effective_map(*p, defs);
      std::vector<std::pair<Name, Name>> pairs;
      for (auto& [formal, actual] : eff) {
        Name na = tgt(actual);
        if (na != formal) pairs.emplace_back(na, formal);
      }
      return Process::mk_call(p->defname, p->args, std::move(pairs));
    }
    case Process::Kind::Nil:
      return p;
    case Process::Kind::Par:
      return Process::mk_par(rename_rec(p->left, ren, defs),
                             rename_rec(p->right, ren, defs));
    case Process::Kind::New: {
      std::map<Name, Name> inner = ren;
      inner.erase(p->chan);
      if (inner.empty()) return p;
      Name b = p->chan;
      ProcPtr body = p->cont;
      // avoid capturing a renaming target under this binder
      std::set<Name> targets;
      for (auto& [from, to] : inner) targets.insert(to);
      if (targets.count(b)) {
        std::set<Name> taken = targets;
        for (auto& c : free_chans(body, defs)) taken.insert(c);
        Name nb = fresh_name(b, taken);
        body = rename_rec(body, {{b, nb}}, defs);
        b = nb;
      }
      return Process::mk_new(b, rename_rec(body, inner, defs));
    }
  }
  throw std::logic_error("bad proc kind");
}

}  // namespace

ProcPtr rename_channels(const ProcPtr& p,
                        const std::vector<std::pair<Name, Name>>& pairs,
                        const DefTable& defs) {
  std::map<Name, Name> ren;
  for (auto& [actual, formal] : pairs) {
    if (actual != formal) ren[formal] = actual;
  }
  return rename_rec(p, ren, defs);
}

ProcPtr unfold_call(const Process& call, const DefTable& defs) {
  const Def& d = defs.at(call.defname);
  if (d.params.size() != call.args.size())
    throw std::runtime_error("call arity mismatch for " + call.defname);
  auto vs = eval_exprs(call.args, Subst{});
  ProcPtr body = substitute(d.body, Subst::of_values(d.params, vs));
  std::map<Name, Name> eff = call_effective_map(call, defs);
  std::map<Name, Name> ren;
  for (auto& [formal, actual] : eff)
    if (formal != actual) ren[formal] = actual;
  return rename_rec(body, ren, defs);
}

// ---------------------------------------------------------------------------
// structural compare

template <typename T>
static int cmp3(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

int compare(const ExprPtr& a, const ExprPtr& b) {
  if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind)))
    return c;
  switch (a->kind) {
    case Expr::Kind::Lit:
      return cmp3(a->lit, b->lit);
    case Expr::Kind::Var:
      return cmp3(a->var, b->var);
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      if (int c = compare(a->lhs, b->lhs)) return c;
      return compare(a->rhs, b->rhs);
  }
  return 0;
}

int compare(const BoolPtr& a, const BoolPtr& b) {
  if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind)))
    return c;
  switch (a->kind) {
    case BoolExpr::Kind::Leq:
      if (int c = compare(a->e1, b->e1)) return c;
      return compare(a->e2, b->e2);
    case BoolExpr::Kind::Not:
      return compare(a->b1, b->b1);
    case BoolExpr::Kind::And:
      if (int c = compare(a->b1, b->b1)) return c;
      return compare(a->b2, b->b2);
  }
  return 0;
}

static int compare_args(const std::vector<ExprPtr>& a,
                        const std::vector<ExprPtr>& b) {
  if (int c = cmp3(a.size(), b.size())) return c;
  for (size_t i = 0; i < a.size(); ++i)
    if (int c = compare(a[i], b[i])) return c;
  return 0;
}

int compare(const ProcPtr& a, const ProcPtr& b) {
  if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind)))
    return c;
  switch (a->kind) {
    case Process::Kind::Out:
      if (int c = cmp3(a->chan, b->chan)) return c;
      return compare_args(a->args, b->args);
    case Process::Kind::In:
      if (int c = cmp3(a->chan, b->chan)) return c;
      if (int c = cmp3(a->params, b->params)) return c;
      return compare(a->cont, b->cont);
    case Process::Kind::If:
      if (int c = compare(a->guard, b->guard)) return c;
      if (int c = compare(a->left, b->left)) return c;
      return compare(a->right, b->right);
    case Process::Kind::Call: {
      if (int c = cmp3(a->defname, b->defname)) return c;
      if (int c = compare_args(a->args, b->args)) return c;
      return cmp3(a->renaming, b->renaming);
    }
    case Process::Kind::Nil:
      return 0;
    case Process::Kind::Par:
      if (int c = compare(a->left, b->left)) return c;
      return compare(a->right, b->right);
    case Process::Kind::New:
      if (int c = cmp3(a->chan, b->chan)) return c;
      return compare(a->cont, b->cont);
  }
  return 0;
}

bool equal(const ProcPtr& a, const ProcPtr& b) { return compare(a, b) == 0; }

}  // namespace permccs
