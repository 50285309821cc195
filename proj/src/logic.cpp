#include "permccs/logic.hpp"

#include <algorithm>

#include "permccs/print.hpp"

namespace permccs {

// ---------------------------------------------------------------------------
// environments

bool env_wellformed(const std::map<Name, PermSet>& m) {
  for (auto& [c, e] : m) {
    if (e.contains(perm_in(c))) return false;
    if (!e.contains(perm_out(c))) return false;
    for (auto& n : e.names())
      if (!m.count(n)) return false;
  }
  return true;
}

PermEnv::PermEnv(std::map<Name, PermSet> m) : map(std::move(m)) {
  if (!env_wellformed(map))
    throw EnvInvariantError("permission environment violates Def. 4.1");
}

const PermSet& PermEnv::at(const Name& c) const {
  auto it = map.find(c);
  if (it == map.end())
    throw std::out_of_range("environment has no entry for " + c);
  return it->second;
}

PermEnv PermEnv::extend(const Name& c, PermSet e) const {
  auto m = map;
  m[c] = std::move(e);
  return PermEnv(std::move(m));
}

PermEnv env_restrict(const PermEnv& env, const Name& c) {
  std::map<Name, PermSet> m;
  for (auto& [d, e] : env.map) {
    if (d == c) continue;
    m[d] = e.minus_chan(c);
  }
  return PermEnv(std::move(m));
}

PermEnv env_restrict(const PermEnv& env, const std::vector<Name>& cs) {
  PermEnv r = env;
  for (auto& c : cs) r = env_restrict(r, c);
  return r;
}

PermEnv rename_env(const PermEnv& env, const Name& from, const Name& to) {
  std::map<Name, PermSet> m;
  for (auto& [d, e] : env.map) {
    PermSet ne;
    for (auto& p : e.perms)
      ne.insert(Perm{p.pol, p.chan == from ? to : p.chan});
    m[d == from ? to : d] = std::move(ne);
  }
  return PermEnv(std::move(m));
}

// ---------------------------------------------------------------------------
// formulas

FormulaPtr Formula::mk_emp() {
  static FormulaPtr f = [] {
    auto r = std::make_shared<Formula>();
    r->kind = Kind::Emp;
    return r;
  }();
  return f;
}
FormulaPtr Formula::mk_any() {
  static FormulaPtr f = [] {
    auto r = std::make_shared<Formula>();
    r->kind = Kind::Any;
    return r;
  }();
  return f;
}
FormulaPtr Formula::mk_state(Name c, std::vector<ExprPtr> args) {
  auto r = std::make_shared<Formula>();
  r->kind = Kind::State;
  r->chan = std::move(c);
  r->args = std::move(args);
  return r;
}
FormulaPtr Formula::mk_blk(Name c) {
  auto r = std::make_shared<Formula>();
  r->kind = Kind::Blk;
  r->chan = std::move(c);
  return r;
}
FormulaPtr Formula::mk_sep(FormulaPtr a, FormulaPtr b) {
  auto r = std::make_shared<Formula>();
  r->kind = Kind::Sep;
  r->left = std::move(a);
  r->right = std::move(b);
  return r;
}
FormulaPtr Formula::mk_sep(const std::vector<FormulaPtr>& parts) {
  if (parts.empty()) return mk_emp();
  FormulaPtr f = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) f = mk_sep(f, parts[i]);
  return f;
}

bool is_state_formula(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Emp:
    case Formula::Kind::State:
      return true;
    case Formula::Kind::Sep:
      return is_state_formula(f->left) && is_state_formula(f->right);
    default:
      return false;
  }
}

std::set<Name> free_vars(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::State: {
      std::set<Name> s;
      for (auto& e : f->args)
        for (auto& v : free_vars(e)) s.insert(v);
      return s;
    }
    case Formula::Kind::Sep: {
      auto s = free_vars(f->left);
      for (auto& v : free_vars(f->right)) s.insert(v);
      return s;
    }
    default:
      return {};
  }
}

std::set<Name> formula_chans(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::State:
    case Formula::Kind::Blk:
      return {f->chan};
    case Formula::Kind::Sep: {
      auto s = formula_chans(f->left);
      for (auto& c : formula_chans(f->right)) s.insert(c);
      return s;
    }
    default:
      return {};
  }
}

FormulaPtr subst_formula(const FormulaPtr& f, const Subst& sigma) {
  switch (f->kind) {
    case Formula::Kind::State: {
      std::vector<ExprPtr> as;
      for (auto& e : f->args) as.push_back(subst_expr(e, sigma));
      return Formula::mk_state(f->chan, std::move(as));
    }
    case Formula::Kind::Sep:
      return Formula::mk_sep(subst_formula(f->left, sigma),
                             subst_formula(f->right, sigma));
    default:
      return f;
  }
}

FormulaPtr rename_formula(const FormulaPtr& f, const Name& from,
                          const Name& to) {
  switch (f->kind) {
    case Formula::Kind::State:
      return f->chan == from ? Formula::mk_state(to, f->args) : f;
    case Formula::Kind::Blk:
      return f->chan == from ? Formula::mk_blk(to) : f;
    case Formula::Kind::Sep:
      return Formula::mk_sep(rename_formula(f->left, from, to),
                             rename_formula(f->right, from, to));
    default:
      return f;
  }
}

int compare(const FormulaPtr& a, const FormulaPtr& b) {
  auto ka = static_cast<int>(a->kind), kb = static_cast<int>(b->kind);
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a->kind) {
    case Formula::Kind::Emp:
    case Formula::Kind::Any:
      return 0;
    case Formula::Kind::Blk:
      return a->chan < b->chan ? -1 : (b->chan < a->chan ? 1 : 0);
    case Formula::Kind::State: {
      if (a->chan != b->chan) return a->chan < b->chan ? -1 : 1;
      if (a->args.size() != b->args.size())
        return a->args.size() < b->args.size() ? -1 : 1;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (int c = compare(a->args[i], b->args[i])) return c;
      return 0;
    }
    case Formula::Kind::Sep:
      if (int c = compare(a->left, b->left)) return c;
      return compare(a->right, b->right);
  }
  return 0;
}

std::vector<FormulaPtr> formula_atoms(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  std::vector<FormulaPtr> stack{f};
  while (!stack.empty()) {
    FormulaPtr g = stack.back();
    stack.pop_back();
    switch (g->kind) {
      case Formula::Kind::Emp:
        break;
      case Formula::Kind::Sep:
        stack.push_back(g->left);
        stack.push_back(g->right);
        break;
      default:
        out.push_back(g);
    }
  }
  std::sort(out.begin(), out.end(), [](const FormulaPtr& a, const FormulaPtr& b) {
    return compare(a, b) < 0;
  });
  return out;
}

bool formula_ac_equal(const FormulaPtr& a, const FormulaPtr& b) {
  auto xa = formula_atoms(a), xb = formula_atoms(b);
  if (xa.size() != xb.size()) return false;
  for (size_t i = 0; i < xa.size(); ++i)
    if (compare(xa[i], xb[i]) != 0) return false;
  return true;
}

std::optional<PermSet> formula_edges(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Emp:
    case Formula::Kind::Blk:
      return PermSet{};
    case Formula::Kind::State:
      return PermSet{perm_out(f->chan)};
    case Formula::Kind::Sep: {
      auto l = formula_edges(f->left), r = formula_edges(f->right);
      if (!l || !r) return std::nullopt;
      return l->unite(*r);
    }
    case Formula::Kind::Any:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<PermSet> formula_triggers(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Emp:
    case Formula::Kind::State:
      return PermSet{};
    case Formula::Kind::Blk:
      return PermSet{perm_out(f->chan)};
    case Formula::Kind::Sep: {
      auto l = formula_triggers(f->left), r = formula_triggers(f->right);
      if (!l || !r) return std::nullopt;
      return l->unite(*r);
    }
    case Formula::Kind::Any:
      return std::nullopt;
  }
  return std::nullopt;
}

bool formulas_separate(const FormulaPtr& a, const FormulaPtr& b) {
  auto ea = formula_edges(a), ta = formula_triggers(a);
  auto eb = formula_edges(b), tb = formula_triggers(b);
  if (!ea || !ta || !eb || !tb) return false;
  return ea->disjoint(*tb) && eb->disjoint(*ta);
}

FormulaPtr formula_restrict(const FormulaPtr& f,
                            const std::vector<Name>& cs) {
  auto scoped = [&](const Name& c) {
    return std::find(cs.begin(), cs.end(), c) != cs.end();
  };
  switch (f->kind) {
    case Formula::Kind::Emp:
      return f;
    case Formula::Kind::State:
    case Formula::Kind::Blk:
      return scoped(f->chan) ? Formula::mk_any() : f;
    case Formula::Kind::Sep:
      return Formula::mk_sep(formula_restrict(f->left, cs),
                             formula_restrict(f->right, cs));
    case Formula::Kind::Any:
      return f;
  }
  return f;
}

// ---------------------------------------------------------------------------
// satisfaction

namespace {

struct StableView {
  std::vector<Name> binders;  // used binders only
  std::vector<std::pair<PermSet, ProcPtr>> leaves;  // unit leaves dropped
};

// view of an already safely-stable system: every leaf is a bare atom
StableView stable_view(const SysPtr& s, const DefTable& defs) {
  StableView out;
  // flatten manually; stable systems have all restrictions on the spine
  std::vector<SysPtr> stack{s};
  std::vector<std::pair<PermSet, ProcPtr>> leaves;
  std::vector<Name> binders;
  std::function<void(const SysPtr&)> walk = [&](const SysPtr& t) {
    switch (t->kind) {
      case System::Kind::Leaf:
        leaves.emplace_back(t->perms, t->proc);
        return;
      case System::Kind::Par:
        walk(t->left);
        walk(t->right);
        return;
      case System::Kind::New:
        binders.push_back(t->chan);
        walk(t->body);
        return;
    }
  };
  walk(s);
  for (auto& [e, p] : leaves) {
    bool nil = p->kind == Process::Kind::Nil;
    if (nil && e.empty()) continue;
    out.leaves.emplace_back(e, p);
  }
  for (auto& b : binders) {
    bool used = false;
    for (auto& [e, p] : out.leaves)
      if (e.names().count(b) || free_chans(p, defs).count(b)) {
        used = true;
        break;
      }
    if (used) out.binders.push_back(b);
  }
  return out;
}

int reason_rank(UnsatReason r) {
  switch (r) {
    case UnsatReason::None: return -1;
    case UnsatReason::NoSafeEvaluation: return 0;
    case UnsatReason::StructureMismatch: return 1;
    case UnsatReason::EnvObligation: return 2;
    case UnsatReason::DataMismatch: return 3;
  }
  return -1;
}

struct ClauseFail {
  UnsatReason reason = UnsatReason::StructureMismatch;
  std::string detail;
};

void merge_fail(ClauseFail& into, const ClauseFail& f) {
  if (reason_rank(f.reason) > reason_rank(into.reason)) into = f;
}

// the leaf atom of a stable leaf (unused inner binders already impossible
// in a stable system)
const ProcPtr& leaf_atom(const std::pair<PermSet, ProcPtr>& leaf) {
  return leaf.second;
}

bool match_clause(const PermEnv& env, const std::vector<Name>& binders,
                  const std::vector<std::pair<PermSet, ProcPtr>>& leaves,
                  const FormulaPtr& f, const DefTable& defs,
                  ClauseFail& fail) {
  switch (f->kind) {
    case Formula::Kind::Emp: {
      if (leaves.empty()) return true;
      fail = {UnsatReason::StructureMismatch, "stable state is not empty"};
      return false;
    }
    case Formula::Kind::Any:
      return true;
    case Formula::Kind::State: {
      if (!binders.empty() || leaves.size() != 1) {
        fail = {UnsatReason::StructureMismatch,
                "stable state is not a single output"};
        return false;
      }
      const ProcPtr& a = leaf_atom(leaves[0]);
      if (a->kind != Process::Kind::Out || a->chan != f->chan) {
        fail = {UnsatReason::StructureMismatch,
                "stable state is not an output on " + f->chan};
        return false;
      }
      if (a->args.size() != f->args.size()) {
        fail = {UnsatReason::DataMismatch, "output arity differs"};
        return false;
      }
      auto want = eval_exprs(f->args, Subst{});
      auto got = eval_exprs(a->args, Subst{});
      if (want != got) {
        fail = {UnsatReason::DataMismatch,
                "output values differ on " + f->chan};
        return false;
      }
      if (!env.has(f->chan) ||
          !env.at(f->chan).subset_of(leaves[0].first)) {
        fail = {UnsatReason::EnvObligation,
                "output on " + f->chan + " does not own env(" + f->chan +
                    ")"};
        return false;
      }
      return true;
    }
    case Formula::Kind::Blk: {
      if (leaves.size() != 1) {
        fail = {UnsatReason::StructureMismatch,
                "stable state is not a single blocked input"};
        return false;
      }
      const ProcPtr& a = leaf_atom(leaves[0]);
      if (a->kind != Process::Kind::In || a->chan != f->chan) {
        fail = {UnsatReason::StructureMismatch,
                "stable state is not an input on " + f->chan};
        return false;
      }
      for (auto& b : binders)
        if (b == f->chan) {
          fail = {UnsatReason::StructureMismatch,
                  f->chan + " is restricted here"};
          return false;
        }
      if (!env.has(f->chan)) {
        fail = {UnsatReason::EnvObligation,
                f->chan + " is not in the environment domain"};
        return false;
      }
      return true;
    }
    case Formula::Kind::Sep: {
      for (auto& b : binders)
        if (env.has(b)) {
          fail = {UnsatReason::StructureMismatch,
                  "restricted channel " + b + " is in the environment domain"};
          return false;
        }
      size_t n = leaves.size();
      ClauseFail best{UnsatReason::StructureMismatch, "no split matches"};
      for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
        std::vector<std::pair<PermSet, ProcPtr>> l, r;
        for (size_t k = 0; k < n; ++k)
          ((mask >> k) & 1 ? l : r).push_back(leaves[k]);
        ClauseFail f1, f2;
        if (match_clause(env, {}, l, f->left, defs, f1) &&
            match_clause(env, {}, r, f->right, defs, f2))
          return true;
        merge_fail(best, f1);
        merge_fail(best, f2);
      }
      fail = best;
      return false;
    }
  }
  return false;
}

}  // namespace

SatResult satisfies(const PermEnv& env, const SysPtr& s, const FormulaPtr& f,
                    const DefTable& defs, const ExploreConfig& cfg) {
  if (!free_vars(f).empty())
    throw std::invalid_argument("satisfaction of an open formula");
  SatResult r;
  auto ex = explore_safe(s, defs, cfg);
  ClauseFail best{UnsatReason::NoSafeEvaluation,
                  ex.any_violation ? "violation: " + ex.violation_witness
                                   : "no safely-stable state reachable"};
  for (size_t i = 0; i < ex.stable.size(); ++i) {
    StableView v = stable_view(ex.stable[i], defs);
    ClauseFail fail;
    if (match_clause(env, v.binders, v.leaves, f, defs, fail)) {
      r.verdict = SatVerdict::Sat;
      r.witness = ex.stable[i];
      r.trace = ex.traces[i];
      return r;
    }
    if (reason_rank(fail.reason) > reason_rank(best.reason) ||
        best.reason == UnsatReason::NoSafeEvaluation)
      best = fail;
  }
  if (ex.truncated) {
    r.verdict = SatVerdict::Unknown;
    r.detail = "exploration budget exhausted";
    return r;
  }
  r.verdict = SatVerdict::Unsat;
  r.reason = best.reason;
  r.detail = best.detail;
  return r;
}

// ---------------------------------------------------------------------------
// brute-force enumeration oracle

void enumerate_candidates(
    const ImplicationBound& bound,
    const std::function<void(const PermEnv&, const SysPtr&)>& yield) {
  const auto& chans = bound.chans;

  // permission universe
  std::vector<Perm> universe;
  for (auto& c : chans) {
    universe.push_back(perm_in(c));
    universe.push_back(perm_out(c));
  }

  // environments: every domain subset, with Gamma(c) = {c!} + extras
  std::vector<PermEnv> envs;
  size_t nd = 1ul << chans.size();
  for (size_t dm = 0; dm < nd; ++dm) {
    std::vector<Name> dom;
    for (size_t i = 0; i < chans.size(); ++i)
      if ((dm >> i) & 1) dom.push_back(chans[i]);
    // extras per channel: permissions over dom except {c?, c!}
    std::vector<std::vector<PermSet>> options;
    for (auto& c : dom) {
      std::vector<Perm> extras;
      for (auto& d : dom) {
        if (d != c) {
          extras.push_back(perm_in(d));
          extras.push_back(perm_out(d));
        }
      }
      std::vector<PermSet> opts;
      for (unsigned long m = 0; m < (1ul << extras.size()); ++m) {
        PermSet e{perm_out(c)};
        for (size_t k = 0; k < extras.size(); ++k)
          if ((m >> k) & 1) e.insert(extras[k]);
        opts.push_back(e);
      }
      options.push_back(opts);
    }
    std::vector<size_t> idx(dom.size(), 0);
    while (true) {
      std::map<Name, PermSet> m;
      for (size_t i = 0; i < dom.size(); ++i) m[dom[i]] = options[i][idx[i]];
      if (env_wellformed(m)) envs.emplace_back(PermEnv(std::move(m)));
      size_t i = 0;
      for (; i < dom.size(); ++i) {
        if (++idx[i] < options[i].size()) break;
        idx[i] = 0;
      }
      if (i == dom.size()) break;
    }
  }

  // atom pool
  std::vector<ProcPtr> pool;
  for (auto& c : chans) {
    pool.push_back(Process::mk_out(c, {}));
    for (auto& v : bound.values)
      pool.push_back(Process::mk_out(c, {Expr::mk_lit(v)}));
    pool.push_back(Process::mk_in(c, {"x"}, Process::mk_nil()));
    for (auto& d : chans)
      pool.push_back(Process::mk_in(
          c, {"x"}, Process::mk_out(d, {Expr::mk_var("x")})));
  }

  // leaf multisets of size <= max_atoms (nondecreasing pool indices)
  std::vector<std::vector<ProcPtr>> multisets;
  std::vector<std::vector<ProcPtr>> layer{{}};
  multisets.push_back({});
  for (int k = 0; k < bound.max_atoms; ++k) {
    std::vector<std::vector<ProcPtr>> next;
    for (auto& ms : layer) {
      size_t start = 0;
      if (!ms.empty()) {
        for (size_t i = 0; i < pool.size(); ++i)
          if (pool[i] == ms.back()) {
            start = i;
            break;
          }
      }
      for (size_t i = start; i < pool.size(); ++i) {
        auto n = ms;
        n.push_back(pool[i]);
        next.push_back(n);
        multisets.push_back(n);
      }
    }
    layer.swap(next);
  }

  for (auto& env : envs) {
    for (auto& ms : multisets) {
      size_t k = ms.size();
      // deal each permission to a leaf or to nobody
      std::vector<size_t> deal(universe.size(), 0);
      while (true) {
        std::vector<PermSet> perms(k);
        bool ok = true;
        for (size_t i = 0; i < universe.size(); ++i) {
          if (deal[i] > 0) {
            if (deal[i] - 1 >= k) {
              ok = false;
              break;
            }
            perms[deal[i] - 1].insert(universe[i]);
          }
        }
        if (ok) {
          SysPtr s;
          if (k == 0) {
            s = System::mk_leaf(PermSet{}, Process::mk_nil());
          } else {
            s = System::mk_leaf(perms[k - 1], ms[k - 1]);
            for (size_t i = k - 1; i-- > 0;)
              s = System::mk_par(System::mk_leaf(perms[i], ms[i]), s);
          }
          yield(env, s);
        }
        size_t i = 0;
        for (; i < universe.size(); ++i) {
          if (++deal[i] <= k) break;
          deal[i] = 0;
        }
        if (i == universe.size()) break;
      }
    }
  }
}

ImplicationResult semantic_implies_bruteforce(const FormulaPtr& phi,
                                              const FormulaPtr& psi,
                                              const DefTable& defs,
                                              const ImplicationBound& bound) {
  ImplicationResult r;
  enumerate_candidates(bound, [&](const PermEnv& env, const SysPtr& s) {
    if (!r.bounded_valid) return;
    auto a = satisfies(env, s, phi, defs, bound.explore);
    if (a.verdict != SatVerdict::Sat) return;
    auto b = satisfies(env, s, psi, defs, bound.explore);
    if (b.verdict == SatVerdict::Unsat) {
      r.bounded_valid = false;
      r.env = env;
      r.system = s;
      r.detail = "satisfies lhs but not rhs: " + print(s);
    }
  });
  return r;
}

}  // namespace permccs
