#include "permccs/confined.hpp"

#include <algorithm>
#include <deque>

#include "permccs/print.hpp"

namespace permccs {

const char* rule_name(SysRule r) {
  switch (r) {
    case SysRule::cThn: return "cThn";
    case SysRule::cEls: return "cEls";
    case SysRule::cCom: return "cCom";
    case SysRule::cPrc: return "cPrc";
    case SysRule::cSpl: return "cSpl";
    case SysRule::cLcl: return "cLcl";
    case SysRule::cTgh: return "cTgh";
    case SysRule::cDsc: return "cDsc";
  }
  return "?";
}

namespace {

struct Leaf {
  PermSet perms;
  ProcPtr proc;
};

struct SysView {
  std::vector<Name> binders;
  std::vector<Leaf> leaves;
};

void sys_view_rec(const SysPtr& s, const DefTable& defs, std::set<Name>& taken,
                  SysView& v) {
  switch (s->kind) {
    case System::Kind::Leaf:
      v.leaves.push_back({s->perms, s->proc});
      return;
    case System::Kind::Par:
      sys_view_rec(s->left, defs, taken, v);
      sys_view_rec(s->right, defs, taken, v);
      return;
    case System::Kind::New: {
      Name b = s->chan;
      SysPtr body = s->body;
      if (taken.count(b)) {
        Name nb = fresh_name(b, taken);
        body = rename_system(body, b, nb, defs);
        b = nb;
      }
      taken.insert(b);
      v.binders.push_back(b);
      sys_view_rec(body, defs, taken, v);
      return;
    }
  }
}

SysView sys_view(const SysPtr& s, const DefTable& defs) {
  SysView v;
  std::set<Name> taken = free_chans(s, defs);
  sys_view_rec(s, defs, taken, v);
  return v;
}

// process-level spine of a leaf body, with unused binders dropped
struct BodyView {
  std::vector<Name> binders;
  std::vector<ProcPtr> atoms;
};

void body_rec(const ProcPtr& p, const DefTable& defs, std::set<Name>& taken,
              BodyView& v) {
  switch (p->kind) {
    case Process::Kind::Nil:
      return;
    case Process::Kind::Par:
      body_rec(p->left, defs, taken, v);
      body_rec(p->right, defs, taken, v);
      return;
    case Process::Kind::New: {
      Name b = p->chan;
      ProcPtr body = p->cont;
      if (taken.count(b)) {
        Name nb = fresh_name(b, taken);
        body = rename_channels(body, {{nb, b}}, defs);
        b = nb;
      }
      taken.insert(b);
      v.binders.push_back(b);
      body_rec(body, defs, taken, v);
      return;
    }
    default:
      v.atoms.push_back(p);
      return;
  }
}

BodyView body_view(const ProcPtr& p, const DefTable& defs,
                   const std::set<Name>& outer_taken) {
  BodyView v;
  std::set<Name> taken = outer_taken;
  for (auto& c : free_chans(p, defs)) taken.insert(c);
  body_rec(p, defs, taken, v);
  // drop binders unused in the atoms
  std::vector<Name> kept;
  for (auto& b : v.binders) {
    for (auto& a : v.atoms) {
      if (free_chans(a, defs).count(b)) {
        kept.push_back(b);
        break;
      }
    }
  }
  v.binders = kept;
  return v;
}

ProcPtr body_rebuild(const std::vector<Name>& binders,
                     const std::vector<ProcPtr>& atoms,
                     const DefTable& defs) {
  if (atoms.empty()) return Process::mk_nil();
  ProcPtr body = atoms.back();
  for (size_t i = atoms.size() - 1; i-- > 0;)
    body = Process::mk_par(atoms[i], body);
  auto fc = free_chans(body, defs);
  std::vector<Name> bs;
  for (auto& b : binders)
    if (fc.count(b)) bs.push_back(b);
  return Process::mk_new(bs, body);
}

SysPtr sys_rebuild(const SysView& v, const std::vector<Leaf>& leaves,
                   const DefTable& defs,
                   const std::vector<Name>& extra_binders = {}) {
  SysPtr body;
  if (leaves.empty()) {
    body = System::mk_leaf(PermSet{}, Process::mk_nil());
  } else {
    body = System::mk_leaf(leaves.back().perms, leaves.back().proc);
    for (size_t i = leaves.size() - 1; i-- > 0;)
      body = System::mk_par(System::mk_leaf(leaves[i].perms, leaves[i].proc),
                            body);
  }
  std::vector<Name> bs = v.binders;
  bs.insert(bs.end(), extra_binders.begin(), extra_binders.end());
  auto fc = free_chans(body, defs);
  std::vector<Name> kept;
  for (auto& b : bs)
    if (fc.count(b)) kept.push_back(b);
  return System::mk_new(kept, body);
}

std::vector<Value> closed_args(const std::vector<ExprPtr>& args) {
  try {
    return eval_exprs(args, Subst{});
  } catch (const EvalError& e) {
    if (e.kind() == EvalErrorKind::UnboundVariable)
      throw StuckOnOpenTerm(e.what());
    throw;
  }
}

}  // namespace

std::optional<std::string> has_violation(const SysPtr& s,
                                         const DefTable& defs) {
  SysView v = sys_view(s, defs);
  std::set<Name> taken;
  for (auto& b : v.binders) taken.insert(b);
  for (auto& leaf : v.leaves) {
    BodyView bv = body_view(leaf.proc, defs, taken);
    if (!bv.binders.empty() || bv.atoms.size() != 1) continue;
    const ProcPtr& a = bv.atoms[0];
    if (a->kind == Process::Kind::Out &&
        !leaf.perms.contains(perm_out(a->chan)))
      return "<" + print(leaf.perms) + ">{ " + print(a) + " } lacks " +
             a->chan + "!";
    if (a->kind == Process::Kind::In &&
        !leaf.perms.contains(perm_in(a->chan)))
      return "<" + print(leaf.perms) + ">{ " + print(a) + " } lacks " +
             a->chan + "?";
  }
  return std::nullopt;
}

std::vector<SysStep> sys_step(const SysPtr& s, const DefTable& defs,
                              const ExploreConfig& cfg) {
  SysView v = sys_view(s, defs);
  std::set<Name> taken = free_chans(s, defs);
  for (auto& b : v.binders) taken.insert(b);

  std::vector<BodyView> views;
  views.reserve(v.leaves.size());
  for (auto& leaf : v.leaves) views.push_back(body_view(leaf.proc, defs, taken));

  std::vector<SysStep> out;

  auto with_leaf_replaced = [&](size_t i, const Leaf& nl) {
    std::vector<Leaf> ls = v.leaves;
    ls[i] = nl;
    return sys_rebuild(v, ls, defs);
  };

  for (size_t i = 0; i < v.leaves.size(); ++i) {
    const Leaf& leaf = v.leaves[i];
    const BodyView& bv = views[i];
    std::string at = std::to_string(i);

    if (bv.atoms.empty()) {
      if (!leaf.perms.empty())  // cDsc
        out.push_back({SysRule::cDsc, at,
                       with_leaf_replaced(i, {PermSet{}, Process::mk_nil()})});
      continue;
    }

    if (!bv.binders.empty()) {
      // cLcl: peel one spine binder, inject its permission pair
      for (size_t k = 0; k < bv.binders.size(); ++k) {
        std::vector<Name> rest = bv.binders;
        Name c = rest[k];
        rest.erase(rest.begin() + k);
        PermSet e = leaf.perms;
        e.insert(perm_in(c));
        e.insert(perm_out(c));
        std::vector<Leaf> ls = v.leaves;
        ls[i] = {e, body_rebuild(rest, bv.atoms, defs)};
        out.push_back({SysRule::cLcl, at, sys_rebuild(v, ls, defs, {c})});
      }
      continue;  // other rules need a binder-free body
    }

    if (bv.atoms.size() == 1) {
      const ProcPtr& a = bv.atoms[0];
      if (a->kind == Process::Kind::If) {
        bool g;
        try {
          g = eval_bool(a->guard, Subst{});
        } catch (const EvalError& e) {
          if (e.kind() == EvalErrorKind::UnboundVariable)
            throw StuckOnOpenTerm(e.what());
          throw;
        }
        out.push_back({g ? SysRule::cThn : SysRule::cEls, at,
                       with_leaf_replaced(i, {leaf.perms, g ? a->left
                                                            : a->right})});
      } else if (a->kind == Process::Kind::Call) {
        out.push_back({SysRule::cPrc, at,
                       with_leaf_replaced(i, {leaf.perms,
                                              unfold_call(*a, defs)})});
      }
    } else {
      // cSpl: all proper bipartitions of the atoms x all permission splits
      if (leaf.perms.size() > static_cast<size_t>(cfg.split_cap))
        throw CapExceeded("cSpl over " + std::to_string(leaf.perms.size()) +
                          " permissions exceeds the split cap");
      size_t n = bv.atoms.size();
      std::vector<Perm> ps(leaf.perms.perms.begin(), leaf.perms.perms.end());
      unsigned long pmax = 1ul << ps.size();
      for (unsigned long mask = 1; mask < (1ul << n); mask += 2) {
        if (mask == (1ul << n) - 1) continue;  // left side = everything
        // mask bit 0 is forced so each unordered bipartition appears once
        std::vector<ProcPtr> la, ra;
        for (size_t k = 0; k < n; ++k)
          ((mask >> k) & 1 ? la : ra).push_back(bv.atoms[k]);
        for (unsigned long pm = 0; pm < pmax; ++pm) {
          PermSet e1, e2;
          for (size_t k = 0; k < ps.size(); ++k)
            ((pm >> k) & 1 ? e1 : e2).insert(ps[k]);
          std::vector<Leaf> ls;
          for (size_t k = 0; k < v.leaves.size(); ++k) {
            if (k == i) {
              ls.push_back({e1, body_rebuild({}, la, defs)});
              ls.push_back({e2, body_rebuild({}, ra, defs)});
            } else {
              ls.push_back(v.leaves[k]);
            }
          }
          out.push_back({SysRule::cSpl, at, sys_rebuild(v, ls, defs)});
        }
      }
    }
  }

  // cCom: output leaf meets input leaf on the same channel
  for (size_t i = 0; i < v.leaves.size(); ++i) {
    if (views[i].atoms.size() != 1 || !views[i].binders.empty()) continue;
    const ProcPtr& oa = views[i].atoms[0];
    if (oa->kind != Process::Kind::Out) continue;
    if (!v.leaves[i].perms.contains(perm_out(oa->chan))) continue;
    for (size_t j = 0; j < v.leaves.size(); ++j) {
      if (j == i) continue;
      if (views[j].atoms.size() != 1 || !views[j].binders.empty()) continue;
      const ProcPtr& ia = views[j].atoms[0];
      if (ia->kind != Process::Kind::In || ia->chan != oa->chan) continue;
      if (!v.leaves[j].perms.contains(perm_in(ia->chan))) continue;
      if (oa->args.size() != ia->params.size()) continue;
      auto vals = closed_args(oa->args);
      ProcPtr cont =
          substitute(ia->cont, Subst::of_values(ia->params, vals));
      std::vector<Leaf> ls;
      for (size_t k = 0; k < v.leaves.size(); ++k) {
        if (k == i) continue;
        if (k == j) {
          ls.push_back({v.leaves[i].perms.unite(v.leaves[j].perms), cont});
        } else {
          ls.push_back(v.leaves[k]);
        }
      }
      out.push_back({SysRule::cCom,
                     std::to_string(i) + "+" + std::to_string(j),
                     sys_rebuild(v, ls, defs)});
    }
  }

  // cTgh: shed a scoped channel's permissions from a leaf not using it
  for (auto& b : v.binders) {
    for (size_t i = 0; i < v.leaves.size(); ++i) {
      const Leaf& leaf = v.leaves[i];
      bool holds = leaf.perms.contains(perm_in(b)) ||
                   leaf.perms.contains(perm_out(b));
      if (!holds) continue;
      if (free_chans(leaf.proc, defs).count(b)) continue;
      out.push_back({SysRule::cTgh, std::to_string(i),
                     with_leaf_replaced(
                         i, {leaf.perms.minus_chan(b), leaf.proc})});
    }
  }

  return out;
}

bool is_safely_stable(const SysPtr& s, const DefTable& defs,
                      const ExploreConfig& cfg) {
  return !has_violation(s, defs) && sys_step(s, defs, cfg).empty();
}

bool is_safely_stable_structural(const SysPtr& s, const DefTable& defs) {
  SysView v = sys_view(s, defs);
  std::set<Name> taken;
  for (auto& b : v.binders) taken.insert(b);
  std::set<Name> outs, ins;
  std::vector<Leaf> kept;
  for (auto& leaf : v.leaves) {
    BodyView bv = body_view(leaf.proc, defs, taken);
    if (bv.atoms.empty() && bv.binders.empty()) {
      if (!leaf.perms.empty()) return false;  // cDsc applies
      continue;                               // unit leaf
    }
    if (!bv.binders.empty() || bv.atoms.size() != 1) return false;
    const ProcPtr& a = bv.atoms[0];
    if (a->kind == Process::Kind::Out) {
      if (!leaf.perms.contains(perm_out(a->chan))) return false;
      outs.insert(a->chan);
    } else if (a->kind == Process::Kind::In) {
      if (!leaf.perms.contains(perm_in(a->chan))) return false;
      ins.insert(a->chan);
    } else {
      return false;  // a conditional or call still reduces
    }
    kept.push_back(leaf);
  }
  for (auto& c : outs)
    if (ins.count(c)) return false;  // matching output/input pair
  // the declutter rules must not apply either
  for (auto& b : v.binders) {
    for (auto& leaf : kept) {
      bool holds = leaf.perms.contains(perm_in(b)) ||
                   leaf.perms.contains(perm_out(b));
      if (holds && !free_chans(leaf.proc, defs).count(b)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// search

namespace {

struct OrderedSucc {
  long prio;        // lower explored first
  size_t seq;       // generation order, stable tiebreak
  SysStep step;
};

std::vector<OrderedSucc> ordered_successors(const SysPtr& s,
                                            const DefTable& defs,
                                            const ExploreConfig& cfg) {
  auto succ = sys_step(s, defs, cfg);
  std::vector<OrderedSucc> out;
  out.reserve(succ.size());
  for (size_t k = 0; k < succ.size(); ++k) {
    long prio = 1000;
    switch (succ[k].rule) {
      case SysRule::cDsc:
        prio = 0;
        break;
      case SysRule::cThn:
      case SysRule::cEls:
      case SysRule::cPrc:
      case SysRule::cCom:
      case SysRule::cLcl:
        prio = 1;
        break;
      case SysRule::cTgh:
        // shedding scoped permissions can lose a narrative (the receiver
        // of a later communication may need them), so it is explored as a
        // branch, never committed to
        prio = 2;
        break;
      case SysRule::cSpl:
        prio = 1000;  // refined below
        break;
    }
    out.push_back({prio, k, succ[k]});
  }
  // refine split priorities: score each split by how many permissions sit
  // on a side that mentions their channel
  for (auto& os : out) {
    if (os.step.rule != SysRule::cSpl) continue;
    SysView v = sys_view(os.step.result, defs);
    long score = 0;
    for (auto& leaf : v.leaves) {
      auto fc = free_chans(leaf.proc, defs);
      for (auto& p : leaf.perms.perms)
        if (fc.count(p.chan)) ++score;
    }
    os.prio = 1000 - score;
  }
  std::stable_sort(out.begin(), out.end(), [](auto& a, auto& b) {
    if (a.prio != b.prio) return a.prio < b.prio;
    return a.seq < b.seq;
  });
  if (cfg.commit_forced && !out.empty() && out.front().prio <= 1)
    out.resize(1);
  return out;
}

struct Dfs {
  const DefTable& defs;
  const ExploreConfig& cfg;
  std::set<std::string> visited;
  long explored = 0;
  bool budget_hit = false;
  SysPtr result;
  std::vector<TraceStep> path;
  std::string deepest_violation;
  size_t deepest_violation_depth = 0;

  bool run(const SysPtr& s) {
    std::string key = canon_system(s, defs).key;
    if (visited.count(key)) return false;
    visited.insert(key);
    if (explored >= cfg.budget) {
      budget_hit = true;
      return false;
    }
    ++explored;
    if (auto w = has_violation(s, defs)) {
      if (path.size() >= deepest_violation_depth) {
        deepest_violation_depth = path.size();
        deepest_violation = *w;
      }
      return false;  // violations are preserved: no safe state below here
    }
    auto succ = ordered_successors(s, defs, cfg);
    if (succ.empty()) {
      result = s;  // stable and violation-free
      return true;
    }
    for (auto& os : succ) {
      path.push_back({static_cast<int>(path.size()) + 1,
                      rule_name(os.step.rule), os.step.redex, os.step.result});
      if (run(os.step.result)) return true;
      path.pop_back();
      if (budget_hit) return false;
    }
    return false;
  }
};

}  // namespace

SafeEvalResult evaluate_safe(const SysPtr& s, const DefTable& defs,
                             const ExploreConfig& cfg) {
  Dfs dfs{defs, cfg};
  SafeEvalResult r;
  r.trace.push_back({0, "", "", s});
  bool found = dfs.run(s);
  r.explored = dfs.explored;
  if (found) {
    r.status = SafeEvalStatus::Found;
    r.result = dfs.result;
    for (auto& st : dfs.path) r.trace.push_back(st);
  } else {
    r.status = dfs.budget_hit ? SafeEvalStatus::Budget
                              : SafeEvalStatus::NoneProven;
    r.violation_witness = dfs.deepest_violation;
  }
  return r;
}

SafeExploreResult explore_safe(const SysPtr& s, const DefTable& defs,
                               const ExploreConfig& cfg) {
  SafeExploreResult r;
  struct NodeInfo {
    SysPtr raw;
    std::string parent;
    std::string rule, redex;
  };
  std::map<std::string, NodeInfo> nodes;
  std::string root = canon_system(s, defs).key;
  nodes[root] = {s, "", "", ""};
  std::deque<std::string> frontier{root};
  std::set<std::string> expanded;
  std::vector<std::string> stable_keys;

  while (!frontier.empty()) {
    if (r.explored >= cfg.budget) {
      r.truncated = true;
      break;
    }
    std::string key = frontier.front();
    frontier.pop_front();
    if (expanded.count(key)) continue;
    expanded.insert(key);
    ++r.explored;
    const SysPtr raw = nodes.at(key).raw;
    if (auto w = has_violation(raw, defs)) {
      r.any_violation = true;
      if (r.violation_witness.empty()) r.violation_witness = *w;
      continue;  // nothing safely stable is reachable below a violation
    }
    auto succ = ordered_successors(raw, defs, cfg);
    if (succ.empty()) {
      stable_keys.push_back(key);
      continue;
    }
    for (auto& os : succ) {
      std::string k2 = canon_system(os.step.result, defs).key;
      if (!nodes.count(k2)) {
        nodes[k2] = {os.step.result, key, rule_name(os.step.rule),
                     os.step.redex};
        frontier.push_back(k2);
      }
    }
  }

  std::sort(stable_keys.begin(), stable_keys.end());
  for (auto& key : stable_keys) {
    r.stable.push_back(nodes.at(key).raw);
    std::vector<TraceStep> tr;
    std::string cur = key;
    while (!cur.empty()) {
      const NodeInfo& ni = nodes.at(cur);
      tr.push_back({0, ni.rule, ni.redex, ni.raw});
      cur = ni.parent;
    }
    std::reverse(tr.begin(), tr.end());
    for (size_t i = 0; i < tr.size(); ++i) tr[i].step = static_cast<int>(i);
    r.traces.push_back(std::move(tr));
  }
  return r;
}

CertifyResult certify_deterministic(const SysPtr& s, const DefTable& defs,
                                    const ExploreConfig& cfg) {
  CertifyResult r;
  r.safe = evaluate_safe(s, defs, cfg);
  if (r.safe.status == SafeEvalStatus::Found) {
    r.certified = true;
    r.result = canon(erase(r.safe.result), defs);
  }
  return r;
}

}  // namespace permccs
