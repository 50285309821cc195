// Canonical normal forms deciding structural equivalence, for processes and
// for systems. The six rules are oriented left-to-right: nil components are
// dropped, restrictions are hoisted maximally (alpha-renaming on the way),
// unused binders are discarded, parallel components are kept as sorted
// multisets and binders are named canonically. Equality of the printed
// canonical form then decides ≡.
//
// Canonical binder naming is alpha-invariant: binders are grouped by an
// occurrence signature (which does not depend on bound names), groups are
// ordered by signature, and only within a group are the remaining orders
// tried, keeping the lexicographically least printed form.

#include <algorithm>
#include <map>
#include <numeric>

#include "permccs/confined.hpp"
#include "permccs/print.hpp"
#include "permccs/semantics.hpp"

namespace permccs {

namespace {

constexpr const char* kTmpPrefix = "\x01h";

Name pick_name(const Name& base, const std::set<Name>& avoid) {
  Name n = base;
  while (avoid.count(n)) n += "'";
  return n;
}

struct CanonCtx {
  const DefTable* defs;
  std::set<Name> free_chans;  // of the whole term (alpha-invariant)
  std::set<Name> free_vars;
  long gensym = 0;

  Name tmp() { return kTmpPrefix + std::to_string(gensym++); }
};

ProcPtr canon_rec(const ProcPtr& p, CanonCtx& cx, int glevel, int vlevel);

struct PGroup {
  std::vector<Name> binders;   // temp names, hoisted
  std::vector<ProcPtr> atoms;  // Out / In / If / Call
};

void flatten_proc(const ProcPtr& p, CanonCtx& cx, PGroup& g) {
  switch (p->kind) {
    case Process::Kind::Nil:
      return;
    case Process::Kind::Par:
      flatten_proc(p->left, cx, g);
      flatten_proc(p->right, cx, g);
      return;
    case Process::Kind::New: {
      Name t = cx.tmp();
      g.binders.push_back(t);
      flatten_proc(rename_channels(p->cont, {{t, p->chan}}, *cx.defs), cx, g);
      return;
    }
    default:
      g.atoms.push_back(p);
      return;
  }
}

// canonicalize inside one atom, all channel names already final
ProcPtr canon_atom(const ProcPtr& a, CanonCtx& cx, int glevel, int vlevel) {
  switch (a->kind) {
    case Process::Kind::Out:
      return a;
    case Process::Kind::In: {
      std::vector<Name> xs;
      Subst ren;
      for (size_t i = 0; i < a->params.size(); ++i) {
        Name nx = pick_name("_v" + std::to_string(vlevel) + "_" +
                                std::to_string(i),
                            cx.free_vars);
        xs.push_back(nx);
        if (nx != a->params[i]) ren.map[a->params[i]] = Expr::mk_var(nx);
      }
      ProcPtr cont = substitute(a->cont, ren);
      return Process::mk_in(a->chan, std::move(xs),
                            canon_rec(cont, cx, glevel + 1, vlevel + 1));
    }
    case Process::Kind::If:
      return Process::mk_if(a->guard,
                            canon_rec(a->left, cx, glevel + 1, vlevel),
                            canon_rec(a->right, cx, glevel + 1, vlevel));
    case Process::Kind::Call: {
      if (!cx.defs->has(a->defname)) return a;
      auto eff = call_effective_map(*a, *cx.defs);
      std::vector<std::pair<Name, Name>> pairs;
      for (auto& [formal, actual] : eff)
        if (formal != actual) pairs.emplace_back(actual, formal);
      std::sort(pairs.begin(), pairs.end(),
                [](auto& x, auto& y) { return x.second < y.second; });
      return Process::mk_call(a->defname, a->args, std::move(pairs));
    }
    default:
      throw std::logic_error("canon_atom: not an atom");
  }
}

// print with every name of `merged` replaced by one token and `self`
// replaced by another; used for alpha-invariant binder signatures
ProcPtr merge_names(const ProcPtr& p, const std::vector<Name>& binders,
                    const Name& self, const DefTable& defs) {
  std::vector<std::pair<Name, Name>> pairs;
  for (auto& b : binders)
    pairs.emplace_back(b == self ? "\x01self" : "\x01other", b);
  return rename_channels(p, pairs, defs);
}

std::string atom_signature_print(const ProcPtr& atom,
                                 const std::vector<Name>& binders,
                                 const Name& self, CanonCtx& cx, int glevel,
                                 int vlevel) {
  ProcPtr merged = merge_names(atom, binders, self, *cx.defs);
  return print(canon_rec(merged, cx, glevel + 1, vlevel));
}

// choose final binder names and atom order; shared by process and system
// canonicalization via the `render` callback, which canonicalizes one
// atom/leaf under a given binder renaming and returns its sort key plus the
// rebuilt node.
template <typename Node>
struct RenderResult {
  std::string key;
  Node node;
};

template <typename Node, typename RenderFn, typename SigFn>
std::pair<std::vector<Name>, std::vector<Node>> canon_group(
    const std::vector<Name>& binders, size_t natoms, CanonCtx& cx, int glevel,
    RenderFn render, SigFn signature, std::string* key_out) {
  // group binders by signature
  std::vector<std::pair<std::string, Name>> sigs;
  for (auto& b : binders) sigs.emplace_back(signature(b), b);
  std::stable_sort(sigs.begin(), sigs.end(),
                   [](auto& x, auto& y) { return x.first < y.first; });
  std::vector<std::vector<Name>> groups;
  for (size_t i = 0; i < sigs.size(); ++i) {
    if (i == 0 || sigs[i].first != sigs[i - 1].first)
      groups.emplace_back();
    groups.back().push_back(sigs[i].second);
  }

  long combos = 1;
  for (auto& g : groups) {
    long f = 1;
    for (size_t i = 2; i <= g.size(); ++i) f *= static_cast<long>(i);
    combos *= f;
    if (combos > 5040)
      throw std::runtime_error(
          "canonical form: too many symmetric binders in one scope");
  }

  // final names, in group order
  std::vector<Name> final_names;
  for (size_t i = 0; i < binders.size(); ++i)
    final_names.push_back(pick_name(
        "_n" + std::to_string(glevel) + "_" + std::to_string(i),
        cx.free_chans));

  std::vector<size_t> group_of;  // per final position, which group
  std::string best_key;
  std::vector<Name> best_binders;
  std::vector<Node> best_nodes;
  bool first = true;

  // iterate over the product of within-group permutations
  std::vector<std::vector<size_t>> perm(groups.size());
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    perm[gi].resize(groups[gi].size());
    std::iota(perm[gi].begin(), perm[gi].end(), 0);
  }
  auto advance = [&]() -> bool {
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      if (std::next_permutation(perm[gi].begin(), perm[gi].end())) return true;
    }
    return false;
  };

  do {
    // assemble renaming temp -> final
    std::vector<std::pair<Name, Name>> ren;  // (final, temp)
    size_t pos = 0;
    std::vector<Name> order;
    for (size_t gi = 0; gi < groups.size(); ++gi)
      for (size_t k = 0; k < groups[gi].size(); ++k) {
        ren.emplace_back(final_names[pos], groups[gi][perm[gi][k]]);
        order.push_back(final_names[pos]);
        ++pos;
      }
    std::vector<RenderResult<Node>> rendered;
    rendered.reserve(natoms);
    for (size_t i = 0; i < natoms; ++i) rendered.push_back(render(i, ren));
    std::sort(rendered.begin(), rendered.end(),
              [](auto& x, auto& y) { return x.key < y.key; });
    std::string key;
    for (auto& n : order) key += n + ";";
    key += "|";
    for (auto& r : rendered) key += r.key + "\x02";
    if (first || key < best_key) {
      first = false;
      best_key = key;
      best_binders = order;
      best_nodes.clear();
      for (auto& r : rendered) best_nodes.push_back(r.node);
    }
  } while (advance());

  if (key_out) *key_out = best_key;
  return {best_binders, best_nodes};
}

ProcPtr canon_rec(const ProcPtr& p, CanonCtx& cx, int glevel, int vlevel) {
  PGroup g;
  flatten_proc(p, cx, g);
  if (g.atoms.empty()) return Process::mk_nil();

  // drop binders unused in the kept atoms
  std::vector<Name> binders;
  for (auto& b : g.binders) {
    bool used = false;
    for (auto& a : g.atoms)
      if (free_chans(a, *cx.defs).count(b)) {
        used = true;
        break;
      }
    if (used) binders.push_back(b);
  }

  std::vector<ProcPtr> atoms;
  std::vector<Name> final_binders;

  if (binders.empty()) {
    for (auto& a : g.atoms) atoms.push_back(canon_atom(a, cx, glevel, vlevel));
    std::sort(atoms.begin(), atoms.end(),
              [](const ProcPtr& x, const ProcPtr& y) {
                return compare(x, y) < 0;
              });
  } else {
    auto render = [&](size_t i, const std::vector<std::pair<Name, Name>>& ren)
        -> RenderResult<ProcPtr> {
      ProcPtr a = rename_channels(g.atoms[i], ren, *cx.defs);
      a = canon_atom(a, cx, glevel, vlevel);
      return {print(a), a};
    };
    auto signature = [&](const Name& b) {
      std::vector<std::string> parts;
      for (auto& a : g.atoms)
        parts.push_back(atom_signature_print(a, binders, b, cx, glevel,
                                             vlevel));
      std::sort(parts.begin(), parts.end());
      std::string s;
      for (auto& x : parts) s += x + "\x02";
      return s;
    };
    auto [bs, ns] =
        canon_group<ProcPtr>(binders, g.atoms.size(), cx, glevel, render,
                             signature, nullptr);
    final_binders = bs;
    atoms = ns;
  }

  ProcPtr body = atoms.back();
  for (size_t i = atoms.size() - 1; i-- > 0;)
    body = Process::mk_par(atoms[i], body);
  return Process::mk_new(final_binders, body);
}

}  // namespace

CanonProcess canon(const ProcPtr& p, const DefTable& defs) {
  CanonCtx cx;
  cx.defs = &defs;
  cx.free_chans = free_chans(p, defs);
  cx.free_vars = free_vars(p);
  ProcPtr n = canon_rec(p, cx, 0, 0);
  return CanonProcess{n, print(n)};
}

bool struct_eq(const ProcPtr& a, const ProcPtr& b, const DefTable& defs) {
  return canon(a, defs).key == canon(b, defs).key;
}

// ---------------------------------------------------------------------------
// systems

namespace {

struct SGroup {
  std::vector<Name> binders;
  std::vector<std::pair<PermSet, ProcPtr>> leaves;
};

void flatten_sys(const SysPtr& s, CanonCtx& cx, SGroup& g) {
  switch (s->kind) {
    case System::Kind::Leaf:
      g.leaves.emplace_back(s->perms, s->proc);
      return;
    case System::Kind::Par:
      flatten_sys(s->left, cx, g);
      flatten_sys(s->right, cx, g);
      return;
    case System::Kind::New: {
      Name t = cx.tmp();
      g.binders.push_back(t);
      flatten_sys(rename_system(s->body, s->chan, t, *cx.defs), cx, g);
      return;
    }
  }
}

PermSet rename_perms(const PermSet& e,
                     const std::vector<std::pair<Name, Name>>& ren) {
  std::map<Name, Name> m;
  for (auto& [to, from] : ren) m[from] = to;
  PermSet r;
  for (auto& p : e.perms) {
    auto it = m.find(p.chan);
    r.insert(Perm{p.pol, it == m.end() ? p.chan : it->second});
  }
  return r;
}

SysPtr canon_sys_impl(const SysPtr& s, const DefTable& defs, bool quas,
                      std::string* key_out) {
  CanonCtx cx;
  cx.defs = &defs;
  cx.free_chans = free_chans(s, defs);
  cx.free_vars = free_vars(s);

  SGroup g;
  flatten_sys(s, cx, g);

  // canonicalize leaf processes enough to decide nil-ness
  std::vector<std::pair<PermSet, ProcPtr>> leaves;
  for (auto& [e, p] : g.leaves) {
    bool is_nil = canon_rec(p, cx, 1, 0)->kind == Process::Kind::Nil;
    if (is_nil && (quas || e.empty())) continue;  // unit leaves
    leaves.emplace_back(e, is_nil ? Process::mk_nil() : p);
  }
  if (leaves.empty())
    leaves.emplace_back(PermSet{}, Process::mk_nil());

  std::vector<Name> binders;
  for (auto& b : g.binders) {
    bool used = false;
    for (auto& [e, p] : leaves) {
      if (free_chans(p, defs).count(b) || (!quas && e.names().count(b))) {
        used = true;
        break;
      }
    }
    if (used) binders.push_back(b);
  }

  auto leaf_key = [&](const PermSet& e, const ProcPtr& cp) {
    std::string k = print(cp);
    if (!quas) k += " @" + print(e);
    return k;
  };

  std::vector<Name> final_binders;
  std::vector<std::pair<PermSet, ProcPtr>> out;

  if (binders.empty()) {
    std::vector<RenderResult<std::pair<PermSet, ProcPtr>>> rendered;
    for (auto& [e, p] : leaves) {
      ProcPtr cp = canon_rec(p, cx, 1, 0);
      rendered.push_back({leaf_key(e, cp), {e, cp}});
    }
    std::sort(rendered.begin(), rendered.end(),
              [](auto& x, auto& y) { return x.key < y.key; });
    for (auto& r : rendered) out.push_back(r.node);
  } else {
    auto render = [&](size_t i, const std::vector<std::pair<Name, Name>>& ren)
        -> RenderResult<std::pair<PermSet, ProcPtr>> {
      PermSet e = quas ? PermSet{} : rename_perms(leaves[i].first, ren);
      ProcPtr p = rename_channels(leaves[i].second, ren, defs);
      ProcPtr cp = canon_rec(p, cx, 1, 0);
      return {leaf_key(e, cp), {e, cp}};
    };
    auto signature = [&](const Name& b) {
      std::vector<std::string> parts;
      for (auto& [e, p] : leaves) {
        std::string ps =
            atom_signature_print(p, binders, b, cx, 0, 0);
        if (!quas) {
          std::vector<std::pair<Name, Name>> ren;
          for (auto& bb : binders)
            ren.emplace_back(bb == b ? "\x01self" : "\x01other", bb);
          ps += " @" + print(rename_perms(e, ren));
        }
        parts.push_back(ps);
      }
      std::sort(parts.begin(), parts.end());
      std::string sig;
      for (auto& x : parts) sig += x + "\x02";
      return sig;
    };
    auto [bs, ns] = canon_group<std::pair<PermSet, ProcPtr>>(
        binders, leaves.size(), cx, 0, render, signature, nullptr);
    final_binders = bs;
    out = ns;
  }

  SysPtr body = System::mk_leaf(out.back().first, out.back().second);
  for (size_t i = out.size() - 1; i-- > 0;)
    body = System::mk_par(System::mk_leaf(out[i].first, out[i].second), body);
  SysPtr res = System::mk_new(final_binders, body);
  if (key_out) {
    std::string k = "new ";
    for (auto& b : final_binders) k += b + ",";
    k += ". ";
    for (auto& [e, p] : out) k += leaf_key(e, p) + " || ";
    *key_out = k;
  }
  return res;
}

}  // namespace

CanonSystem canon_system(const SysPtr& s, const DefTable& defs) {
  std::string key;
  SysPtr n = canon_sys_impl(s, defs, /*quas=*/false, &key);
  return CanonSystem{n, key};
}

bool sys_struct_eq(const SysPtr& a, const SysPtr& b, const DefTable& defs) {
  return canon_system(a, defs).key == canon_system(b, defs).key;
}

std::string quaseq_key(const SysPtr& s, const DefTable& defs) {
  std::string key;
  canon_sys_impl(s, defs, /*quas=*/true, &key);
  return key;
}

bool quaseq(const SysPtr& a, const SysPtr& b, const DefTable& defs) {
  return quaseq_key(a, defs) == quaseq_key(b, defs);
}

}  // namespace permccs
