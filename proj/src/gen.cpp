#include "permccs/gen.hpp"

namespace permccs {

std::vector<Name> gen_channels(const GenSpec& spec) {
  std::vector<Name> cs;
  for (int i = 1; i <= spec.max_channels; ++i)
    cs.push_back("c" + std::to_string(i));
  return cs;
}

namespace {

struct Gen {
  const GenSpec& spec;
  std::mt19937_64& rng;
  std::vector<Name> chans;
  std::vector<Name> scope_vars;
  int next_var = 0;

  long pick(long n) { return static_cast<long>(rng() % n); }

  Name chan() { return chans[pick(chans.size())]; }

  ExprPtr expr() {
    if (!scope_vars.empty() && pick(3) == 0)
      return Expr::mk_var(scope_vars[pick(scope_vars.size())]);
    Value v = static_cast<Value>(pick(2 * spec.max_value + 1)) -
              spec.max_value;
    if (pick(4) == 0)
      return Expr::mk_add(Expr::mk_lit(v), Expr::mk_lit(1));
    return Expr::mk_lit(v);
  }

  BoolPtr guard() {
    BoolPtr b = BoolExpr::mk_leq(expr(), expr());
    if (pick(3) == 0) b = BoolExpr::mk_not(b);
    if (pick(4) == 0) b = BoolExpr::mk_and(b, BoolExpr::mk_leq(expr(), expr()));
    return b;
  }

  std::vector<ExprPtr> args() {
    std::vector<ExprPtr> as;
    long n = pick(3);  // arity 0..2, small arities dominate matches
    if (n == 2 && pick(2)) n = 1;
    for (long i = 0; i < n; ++i) as.push_back(expr());
    return as;
  }

  ProcPtr proc(int depth) {
    long r = pick(depth <= 0 ? 3 : 10);
    switch (r) {
      case 0:
        return Process::mk_nil();
      case 1:
      case 2:
      case 3:
        return Process::mk_out(chan(), args());
      case 4:
      case 5: {
        Name c = chan();
        long arity = pick(2);
        std::vector<Name> xs;
        for (long i = 0; i < arity; ++i)
          xs.push_back("v" + std::to_string(next_var++));
        for (auto& x : xs) scope_vars.push_back(x);
        ProcPtr cont = proc(depth - 1);
        for (size_t i = 0; i < xs.size(); ++i) scope_vars.pop_back();
        return Process::mk_in(c, xs, cont);
      }
      case 6:
        return Process::mk_if(guard(), proc(depth - 1), proc(depth - 1));
      case 7:
      case 8:
        return Process::mk_par(proc(depth - 1), proc(depth - 1));
      default: {
        Name c = "n" + std::to_string(next_var++);
        chans.push_back(c);
        ProcPtr body = proc(depth - 1);
        chans.pop_back();
        return Process::mk_new(c, body);
      }
    }
  }
};

}  // namespace

ProcPtr gen_process(const GenSpec& spec, std::mt19937_64& rng) {
  Gen g{spec, rng, gen_channels(spec)};
  return g.proc(spec.max_depth);
}

SysPtr gen_system(const GenSpec& spec, std::mt19937_64& rng) {
  Gen g{spec, rng, gen_channels(spec)};
  int leaves = 1 + static_cast<int>(rng() % spec.max_atoms);
  std::vector<ProcPtr> bodies;
  for (int i = 0; i < leaves; ++i) bodies.push_back(g.proc(spec.max_depth));
  // deal each permission to one leaf or to nobody
  std::vector<PermSet> perms(leaves);
  for (auto& c : gen_channels(spec)) {
    long where = static_cast<long>(rng() % (leaves + 1));
    if (where < leaves) perms[where].insert(perm_in(c));
    where = static_cast<long>(rng() % (leaves + 1));
    if (where < leaves) perms[where].insert(perm_out(c));
  }
  SysPtr s = System::mk_leaf(perms[leaves - 1], bodies[leaves - 1]);
  for (int i = leaves - 2; i >= 0; --i)
    s = System::mk_par(System::mk_leaf(perms[i], bodies[i]), s);
  // occasionally restrict a channel over the whole system
  if (rng() % 3 == 0) {
    auto cs = gen_channels(spec);
    s = System::mk_new(cs[rng() % cs.size()], s);
  }
  return s;
}

namespace {

ProcPtr shuffle_rec(const ProcPtr& p, const DefTable& defs,
                    std::mt19937_64& rng) {
  switch (p->kind) {
    case Process::Kind::Par: {
      ProcPtr l = shuffle_rec(p->left, defs, rng);
      ProcPtr r = shuffle_rec(p->right, defs, rng);
      if (rng() % 2) std::swap(l, r);
      ProcPtr out = Process::mk_par(l, r);
      if (rng() % 3 == 0) out = Process::mk_par(out, Process::mk_nil());
      return out;
    }
    case Process::Kind::New: {
      ProcPtr body = shuffle_rec(p->cont, defs, rng);
      Name b = p->chan;
      if (rng() % 2) {
        std::set<Name> taken = free_chans(body, defs);
        taken.insert(b);
        Name nb = fresh_name(b + "r", taken);
        body = rename_channels(body, {{nb, b}}, defs);
        b = nb;
      }
      return Process::mk_new(b, body);
    }
    case Process::Kind::In:
      return Process::mk_in(p->chan, p->params,
                            shuffle_rec(p->cont, defs, rng));
    case Process::Kind::If:
      return Process::mk_if(p->guard, shuffle_rec(p->left, defs, rng),
                            shuffle_rec(p->right, defs, rng));
    default:
      if (rng() % 4 == 0) return Process::mk_par(Process::mk_nil(), p);
      return p;
  }
}

}  // namespace

ProcPtr shuffle_equiv(const ProcPtr& p, const DefTable& defs,
                      std::mt19937_64& rng) {
  return shuffle_rec(p, defs, rng);
}

}  // namespace permccs
