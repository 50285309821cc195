#include "permccs/metatheory.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "permccs/confined.hpp"
#include "permccs/print.hpp"

namespace permccs {

namespace {

struct Suite {
  SuiteReport report;
  const ExploreConfig& cfg;
  DefTable defs;  // generated systems are call-free

  void fail(const std::string& msg) {
    ++report.failures;
    if (report.first_counterexample.empty())
      report.first_counterexample = msg;
  }
  void check(bool ok, const std::function<std::string()>& msg) {
    ++report.checks;
    if (!ok) fail(msg());
  }
};

// Lemma: reductions only shrink the owned permission set.
void suite_locality(Suite& st, const SysPtr& s) {
  PermSet before = owned_perms(s);
  for (auto& step : sys_step(s, st.defs, st.cfg)) {
    st.check(owned_perms(step.result).subset_of(before), [&] {
      return "locality broken by " + std::string(rule_name(step.rule)) +
             " on " + print(s);
    });
  }
}

// Lemma: well-resourcing is preserved by reduction.
void suite_resourcing(Suite& st, const SysPtr& s) {
  for (auto& step : sys_step(s, st.defs, st.cfg)) {
    st.check(well_resourced(step.result), [&] {
      return "resourcing broken by " + std::string(rule_name(step.rule)) +
             " on " + print(s);
    });
  }
}

// Lemma: a violation can never be repaired by reducing.
void suite_violation(Suite& st, const SysPtr& s) {
  if (!has_violation(s, st.defs)) return;
  std::deque<std::pair<SysPtr, int>> frontier{{s, 0}};
  long seen = 0;
  while (!frontier.empty() && seen < 200) {
    auto [t, depth] = frontier.front();
    frontier.pop_front();
    ++seen;
    st.check(has_violation(t, st.defs).has_value(), [&] {
      return "violation vanished after " + std::to_string(depth) +
             " step(s) from " + print(s);
    });
    if (depth >= 2) continue;
    for (auto& step : sys_step(t, st.defs, st.cfg))
      frontier.push_back({step.result, depth + 1});
  }
}

// Lemma: any two one-step reducts are ~= or joinable in one step.
void suite_confluence(Suite& st, const SysPtr& s) {
  auto succ = sys_step(s, st.defs, st.cfg);
  if (succ.size() > 24) succ.resize(24);  // keep the pair count sane
  std::vector<std::set<std::string>> next_keys(succ.size());
  std::vector<std::string> qkeys(succ.size());
  for (size_t i = 0; i < succ.size(); ++i)
    qkeys[i] = quaseq_key(succ[i].result, st.defs);
  auto nexts = [&](size_t i) -> const std::set<std::string>& {
    if (next_keys[i].empty()) {
      for (auto& step : sys_step(succ[i].result, st.defs, st.cfg))
        next_keys[i].insert(canon_system(step.result, st.defs).key);
    }
    return next_keys[i];
  };
  for (size_t i = 0; i < succ.size(); ++i) {
    for (size_t j = i + 1; j < succ.size(); ++j) {
      if (qkeys[i] == qkeys[j]) {
        ++st.report.checks;
        continue;
      }
      auto& a = nexts(i);
      auto& b = nexts(j);
      bool joinable = std::any_of(a.begin(), a.end(), [&](const std::string& k) {
        return b.count(k) != 0;
      });
      st.check(joinable, [&] {
        return "diamond failed between " + std::string(rule_name(succ[i].rule)) +
               " and " + std::string(rule_name(succ[j].rule)) + " on " +
               print(s);
      });
    }
  }
}

// Theorem: all safely-stable results agree after erasure. Runs on the
// full interleaving graph, not the committed one.
void suite_determinism(Suite& st, const SysPtr& s) {
  ExploreConfig full = st.cfg;
  full.commit_forced = false;
  auto ex = explore_safe(s, st.defs, full);
  if (ex.truncated || ex.stable.empty()) return;
  std::string first = canon(erase(ex.stable[0]), st.defs).key;
  for (auto& t : ex.stable) {
    st.check(canon(erase(t), st.defs).key == first, [&] {
      return "two safely-stable results with different erasures from " +
             print(s);
    });
  }
}

// The committed exploration reaches the same stable states as the full
// one, up to the placement of scoped permissions.
void suite_commit_complete(Suite& st, const SysPtr& s) {
  ExploreConfig full = st.cfg;
  full.commit_forced = false;
  ExploreConfig por = st.cfg;
  por.commit_forced = true;
  auto a = explore_safe(s, st.defs, full);
  auto b = explore_safe(s, st.defs, por);
  if (a.truncated || b.truncated) return;
  auto project = [&](const std::vector<SysPtr>& ss) {
    // free-channel permission placement plus the erased skeleton
    std::set<std::string> keys;
    for (auto& t : ss) {
      auto fn = free_chans(t, st.defs);
      std::function<SysPtr(const SysPtr&)> strip =
          [&](const SysPtr& q) -> SysPtr {
        switch (q->kind) {
          case System::Kind::Leaf: {
            PermSet e;
            for (auto& p : q->perms.perms)
              if (fn.count(p.chan)) e.insert(p);
            return System::mk_leaf(e, q->proc);
          }
          case System::Kind::Par:
            return System::mk_par(strip(q->left), strip(q->right));
          case System::Kind::New:
            return System::mk_new(q->chan, strip(q->body));
        }
        return q;
      };
      keys.insert(canon_system(strip(t), st.defs).key);
    }
    return keys;
  };
  st.check(project(a.stable) == project(b.stable), [&] {
    return "committed exploration misses stable states of " + print(s);
  });
}

// Theorem: a safe evaluation implies every bounded path terminates.
void suite_convergence(Suite& st, const SysPtr& s) {
  auto safe = evaluate_safe(s, st.defs, st.cfg);
  if (safe.status != SafeEvalStatus::Found) return;
  // explore the full graph and look for a cycle
  std::map<std::string, std::set<std::string>> edges;
  std::map<std::string, SysPtr> nodes;
  std::string root = canon_system(s, st.defs).key;
  nodes[root] = s;
  std::deque<std::string> frontier{root};
  long budget = st.cfg.budget;
  bool truncated = false;
  while (!frontier.empty()) {
    if (--budget < 0) {
      truncated = true;
      break;
    }
    auto key = frontier.front();
    frontier.pop_front();
    if (edges.count(key)) continue;
    auto& out = edges[key];
    for (auto& step : sys_step(nodes.at(key), st.defs, st.cfg)) {
      auto k2 = canon_system(step.result, st.defs).key;
      out.insert(k2);
      if (!nodes.count(k2)) {
        nodes[k2] = step.result;
        frontier.push_back(k2);
      }
    }
  }
  if (truncated) return;
  // DFS cycle check
  std::map<std::string, int> color;
  std::function<bool(const std::string&)> dfs = [&](const std::string& k) {
    color[k] = 1;
    auto it = edges.find(k);
    if (it != edges.end()) {
      for (auto& n : it->second) {
        if (color[n] == 1) return true;
        if (color[n] == 0 && dfs(n)) return true;
      }
    }
    color[k] = 2;
    return false;
  };
  st.check(!dfs(root), [&] {
    return "system evaluates safely but has a reduction cycle: " + print(s);
  });
}

// Lemma: confined steps erase to process steps (or to equal processes).
void suite_correspondence(Suite& st, const SysPtr& s) {
  ProcPtr es = erase(s);
  std::optional<std::set<std::string>> proc_next;
  for (auto& stp : sys_step(s, st.defs, st.cfg)) {
    ProcPtr et = erase(stp.result);
    if (struct_eq(es, et, st.defs)) {
      ++st.report.checks;
      continue;
    }
    if (!proc_next) {
      proc_next.emplace();
      for (auto& ps : step(es, st.defs))
        proc_next->insert(canon(ps.result, st.defs).key);
    }
    st.check(proc_next->count(canon(et, st.defs).key) != 0, [&] {
      return "erased step has no process counterpart: " +
             std::string(rule_name(stp.rule)) + " on " + print(s);
    });
  }
}

// Theorem: a successful narrative pins down every process evaluation.
void suite_proc_determinism(Suite& st, const SysPtr& s) {
  auto safe = evaluate_safe(s, st.defs, st.cfg);
  (void)0;
  if (safe.status != SafeEvalStatus::Found) return;
  std::string target = canon(erase(safe.result), st.defs).key;
  auto ev = evaluate(erase(s), st.defs, st.cfg);
  if (ev.truncated) return;
  st.check(!ev.stable.empty(), [&] {
    return "process level found no stable state for " + print(s);
  });
  for (auto& q : ev.stable) {
    st.check(q.key == target, [&] {
      return "process evaluation disagrees with the narrative on " + print(s);
    });
  }
}

// Proposition: the structural characterization of safe stability agrees
// with the definition.
void suite_structural(Suite& st, const SysPtr& s) {
  auto probe = [&](const SysPtr& t) {
    st.check(is_safely_stable(t, st.defs, st.cfg) ==
                 is_safely_stable_structural(t, st.defs),
             [&] {
               return "structural safe-stability check disagrees on " +
                      print(t);
             });
  };
  probe(s);
  auto succ = sys_step(s, st.defs, st.cfg);
  for (size_t i = 0; i < succ.size() && i < 8; ++i) probe(succ[i].result);
}

// Lemma (merging): separate satisfactions compose across *.
void suite_merging(Suite& st, const SysPtr& ignored, const GenSpec& spec,
                   std::mt19937_64& rng) {
  (void)ignored;
  // generate two systems over disjoint channel alphabets
  GenSpec half = spec;
  half.max_channels = std::max(1, spec.max_channels / 2);
  half.max_atoms = std::max(1, spec.max_atoms / 2);
  SysPtr s = gen_system(half, rng);
  std::set<Name> salphabet;
  for (auto& c : gen_channels(half)) salphabet.insert(c);
  // shift the second system's channels
  SysPtr t = gen_system(half, rng);
  for (auto& c : gen_channels(half))
    t = rename_system(t, c, "d" + c.substr(1), st.defs);

  auto synth = [&](const SysPtr& sys)
      -> std::optional<std::pair<FormulaPtr, PermEnv>> {
    auto ex = explore_safe(sys, st.defs, st.cfg);
    if (ex.truncated || ex.stable.empty()) return std::nullopt;
    // describe the first stable state by a formula, when it is binder-free
    const SysPtr& stable = ex.stable[0];
    std::vector<FormulaPtr> atoms;
    std::map<Name, PermSet> env;
    std::function<bool(const SysPtr&)> walk = [&](const SysPtr& q) {
      switch (q->kind) {
        case System::Kind::New:
          return false;
        case System::Kind::Par:
          return walk(q->left) && walk(q->right);
        case System::Kind::Leaf: {
          if (q->proc->kind == Process::Kind::Out) {
            std::vector<ExprPtr> vals;
            for (auto& e : q->proc->args)
              vals.push_back(Expr::mk_lit(eval_expr(e)));
            atoms.push_back(Formula::mk_state(q->proc->chan, vals));
            env[q->proc->chan] = PermSet{perm_out(q->proc->chan)};
            return true;
          }
          if (q->proc->kind == Process::Kind::In) {
            atoms.push_back(Formula::mk_blk(q->proc->chan));
            env[q->proc->chan] = PermSet{perm_out(q->proc->chan)};
            return true;
          }
          return q->proc->kind == Process::Kind::Nil;
        }
      }
      return false;
    };
    if (!walk(stable)) return std::nullopt;
    return std::make_pair(Formula::mk_sep(atoms), PermEnv(std::move(env)));
  };

  auto fs = synth(s);
  auto ft = synth(t);
  if (!fs || !ft) return;
  // one shared environment covering both alphabets
  std::map<Name, PermSet> m = fs->second.map;
  for (auto& [c, e] : ft->second.map) m[c] = e;
  PermEnv env(std::move(m));
  if (!separate(s, t)) return;
  if (!formulas_separate(fs->first, ft->first)) return;
  if (satisfies(env, s, fs->first, st.defs, st.cfg).verdict != SatVerdict::Sat)
    return;
  if (satisfies(env, t, ft->first, st.defs, st.cfg).verdict != SatVerdict::Sat)
    return;
  auto both = System::try_par(s, t);
  if (!both) return;
  auto merged = satisfies(env, *both,
                          Formula::mk_sep(fs->first, ft->first), st.defs,
                          st.cfg);
  st.check(merged.verdict == SatVerdict::Sat, [&] {
    return "merging failed for " + print(s) + " and " + print(t);
  });
  ++st.report.systems;  // this suite generates its own pair
}

// Process-level sanity: structurally shuffled terms have equal canonical
// forms and equal step sets.
void suite_struct_eq(Suite& st, const SysPtr& s, const GenSpec& spec,
                     std::mt19937_64& rng) {
  (void)spec;
  ProcPtr p = erase(s);
  ProcPtr q = shuffle_equiv(p, st.defs, rng);
  st.check(struct_eq(p, q, st.defs), [&] {
    return "shuffle broke structural equivalence: " + print(p) + " vs " +
           print(q);
  });
  std::set<std::string> sp, sq;
  for (auto& stp : step(p, st.defs)) sp.insert(canon(stp.result, st.defs).key);
  for (auto& stq : step(q, st.defs)) sq.insert(canon(stq.result, st.defs).key);
  st.check(sp == sq, [&] {
    return "steps differ across structural equivalence on " + print(p);
  });
}

}  // namespace

std::vector<std::string> metatheory_suite_names() {
  return {"locality",     "resourcing",  "violation",   "confluence",
          "determinism",  "convergence", "correspondence",
          "proc-determinism", "structural", "merging", "struct-eq",
          "commit-complete"};
}

SuiteReport run_metatheory_suite(const std::string& name, const GenSpec& spec,
                                 int count, const ExploreConfig& explore) {
  Suite st{SuiteReport{name}, explore};
  std::mt19937_64 rng(spec.seed);
  for (int i = 0; i < count; ++i) {
    SysPtr s = gen_system(spec, rng);
    ++st.report.systems;
    try {
      if (name == "locality") suite_locality(st, s);
      else if (name == "resourcing") suite_resourcing(st, s);
      else if (name == "violation") suite_violation(st, s);
      else if (name == "confluence") suite_confluence(st, s);
      else if (name == "determinism") suite_determinism(st, s);
      else if (name == "convergence") suite_convergence(st, s);
      else if (name == "correspondence") suite_correspondence(st, s);
      else if (name == "proc-determinism") suite_proc_determinism(st, s);
      else if (name == "structural") suite_structural(st, s);
      else if (name == "merging") suite_merging(st, s, spec, rng);
      else if (name == "commit-complete") suite_commit_complete(st, s);
      else if (name == "struct-eq") suite_struct_eq(st, s, spec, rng);
      else throw std::invalid_argument("unknown suite: " + name);
    } catch (const CapExceeded&) {
      // oversized split sets are out of scope for the random suites
    }
  }
  return st.report;
}

}  // namespace permccs
