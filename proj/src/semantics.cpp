#include "permccs/semantics.hpp"

#include <algorithm>
#include <deque>

#include "permccs/print.hpp"

namespace permccs {

const char* rule_name(ProcRule r) {
  switch (r) {
    case ProcRule::rThn: return "rThn";
    case ProcRule::rEls: return "rEls";
    case ProcRule::rCom: return "rCom";
    case ProcRule::rPrc: return "rPrc";
  }
  return "?";
}

namespace {

struct RawView {
  std::vector<Name> binders;
  std::vector<ProcPtr> atoms;
};

void raw_rec(const ProcPtr& p, const DefTable& defs, std::set<Name>& taken,
             RawView& v) {
  switch (p->kind) {
    case Process::Kind::Nil:
      return;
    case Process::Kind::Par:
      raw_rec(p->left, defs, taken, v);
      raw_rec(p->right, defs, taken, v);
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
      raw_rec(body, defs, taken, v);
      return;
    }
    default:
      v.atoms.push_back(p);
      return;
  }
}

RawView raw_view(const ProcPtr& p, const DefTable& defs) {
  RawView v;
  std::set<Name> taken = free_chans(p, defs);
  raw_rec(p, defs, taken, v);
  return v;
}

ProcPtr rebuild(const RawView& v, const std::vector<ProcPtr>& atoms,
                const DefTable& defs) {
  if (atoms.empty()) return Process::mk_nil();
  ProcPtr body = atoms.back();
  for (size_t i = atoms.size() - 1; i-- > 0;)
    body = Process::mk_par(atoms[i], body);
  // keep only binders still free in the result
  auto fc = free_chans(body, defs);
  std::vector<Name> bs;
  for (auto& b : v.binders)
    if (fc.count(b)) bs.push_back(b);
  return Process::mk_new(bs, body);
}

std::vector<Value> eval_closed_args(const std::vector<ExprPtr>& args) {
  try {
    return eval_exprs(args, Subst{});
  } catch (const EvalError& e) {
    if (e.kind() == EvalErrorKind::UnboundVariable)
      throw StuckOnOpenTerm(e.what());
    throw;
  }
}

}  // namespace

std::vector<ProcStep> step(const ProcPtr& p, const DefTable& defs) {
  RawView v = raw_view(p, defs);
  std::vector<ProcStep> out;

  auto replace = [&](size_t i, const ProcPtr& np) {
    std::vector<ProcPtr> atoms;
    for (size_t k = 0; k < v.atoms.size(); ++k) {
      if (k == i) {
        if (np->kind != Process::Kind::Nil) atoms.push_back(np);
      } else {
        atoms.push_back(v.atoms[k]);
      }
    }
    return rebuild(v, atoms, defs);
  };

  for (size_t i = 0; i < v.atoms.size(); ++i) {
    const ProcPtr& a = v.atoms[i];
    switch (a->kind) {
      case Process::Kind::If: {
        bool g;
        try {
          g = eval_bool(a->guard, Subst{});
        } catch (const EvalError& e) {
          if (e.kind() == EvalErrorKind::UnboundVariable)
            throw StuckOnOpenTerm(e.what());
          throw;
        }
        out.push_back({g ? ProcRule::rThn : ProcRule::rEls,
                       std::to_string(i), replace(i, g ? a->left : a->right)});
        break;
      }
      case Process::Kind::Call: {
        out.push_back(
            {ProcRule::rPrc, std::to_string(i), replace(i, unfold_call(*a, defs))});
        break;
      }
      default:
        break;
    }
  }

  // communications: every output/input pair on the same channel
  for (size_t i = 0; i < v.atoms.size(); ++i) {
    if (v.atoms[i]->kind != Process::Kind::Out) continue;
    for (size_t j = 0; j < v.atoms.size(); ++j) {
      if (v.atoms[j]->kind != Process::Kind::In) continue;
      if (v.atoms[i]->chan != v.atoms[j]->chan) continue;
      if (v.atoms[i]->args.size() != v.atoms[j]->params.size()) continue;
      auto vals = eval_closed_args(v.atoms[i]->args);
      ProcPtr cont = substitute(
          v.atoms[j]->cont, Subst::of_values(v.atoms[j]->params, vals));
      std::vector<ProcPtr> atoms;
      for (size_t k = 0; k < v.atoms.size(); ++k) {
        if (k == i) continue;
        if (k == j) {
          if (cont->kind != Process::Kind::Nil) atoms.push_back(cont);
        } else {
          atoms.push_back(v.atoms[k]);
        }
      }
      out.push_back({ProcRule::rCom,
                     std::to_string(i) + "+" + std::to_string(j),
                     rebuild(v, atoms, defs)});
    }
  }
  return out;
}

ReductionGraph explore(const ProcPtr& p, const DefTable& defs,
                       const ExploreConfig& cfg) {
  ReductionGraph g;
  CanonProcess c0 = canon(p, defs);
  g.root = c0.key;
  g.nodes[c0.key] = p;
  std::deque<std::string> frontier{c0.key};
  while (!frontier.empty()) {
    if (g.explored >= cfg.budget) {
      g.truncated = true;
      break;
    }
    std::string key = frontier.front();
    frontier.pop_front();
    if (g.edges.count(key)) continue;
    ++g.explored;
    ProcPtr raw = g.nodes.at(key);
    auto& succ = g.edges[key];
    for (auto& st : step(raw, defs)) {
      CanonProcess c = canon(st.result, defs);
      succ.insert(c.key);
      if (!g.nodes.count(c.key)) {
        g.nodes[c.key] = st.result;
        frontier.push_back(c.key);
      }
    }
  }
  return g;
}

EvalResult evaluate(const ProcPtr& p, const DefTable& defs,
                    const ExploreConfig& cfg) {
  ReductionGraph g = explore(p, defs, cfg);
  EvalResult r;
  r.truncated = g.truncated;
  for (auto& [key, succ] : g.edges) {
    if (succ.empty()) {
      r.stable.push_back(canon(g.nodes.at(key), defs));
      r.representatives[key] = g.nodes.at(key);
    }
  }
  std::sort(r.stable.begin(), r.stable.end());
  return r;
}

DeterminismResult is_deterministic(const ProcPtr& p, const DefTable& defs,
                                   const ExploreConfig& cfg) {
  ReductionGraph g = explore(p, defs, cfg);
  DeterminismResult r;
  r.eval.truncated = g.truncated;
  for (auto& [key, succ] : g.edges) {
    if (succ.empty()) {
      r.eval.stable.push_back(canon(g.nodes.at(key), defs));
      r.eval.representatives[key] = g.nodes.at(key);
    }
  }
  std::sort(r.eval.stable.begin(), r.eval.stable.end());

  if (r.eval.stable.size() >= 2) {
    r.verdict = Determinism::NonDeterministic;
    r.witness1 = r.eval.representatives.at(r.eval.stable[0].key);
    r.witness2 = r.eval.representatives.at(r.eval.stable[1].key);
    return r;
  }

  // cycle detection over the explored subgraph (iterative coloring)
  std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
  for (auto& [start, _] : g.edges) {
    if (color[start]) continue;
    std::vector<std::pair<std::string, bool>> stack{{start, false}};
    while (!stack.empty()) {
      auto [key, leaving] = stack.back();
      stack.pop_back();
      if (leaving) {
        color[key] = 2;
        continue;
      }
      if (color[key] == 2) continue;
      if (color[key] == 1) continue;
      color[key] = 1;
      stack.push_back({key, true});
      auto it = g.edges.find(key);
      if (it == g.edges.end()) continue;  // unexpanded (budget edge)
      for (auto& nxt : it->second) {
        if (color[nxt] == 1) {
          r.verdict = Determinism::Diverges;
          r.lasso = g.nodes.at(nxt);
          return r;
        }
        if (!color[nxt]) stack.push_back({nxt, false});
      }
    }
  }

  if (g.truncated) {
    r.verdict = Determinism::Unknown;
    return r;
  }
  r.verdict = Determinism::Deterministic;
  return r;
}

}  // namespace permccs
