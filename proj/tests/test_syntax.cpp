#include <random>

#include "doctest.h"
#include "permccs/ast.hpp"
#include "permccs/gen.hpp"
#include "permccs/parse.hpp"
#include "permccs/print.hpp"
#include "permccs/semantics.hpp"

using namespace permccs;

namespace {

ExprPtr V(const char* x) { return Expr::mk_var(x); }
ExprPtr L(Value v) { return Expr::mk_lit(v); }

}  // namespace

TEST_CASE("expression evaluation") {
  // 5-3 evaluates to 2 (the data of c1!(5-3,3+1))
  CHECK(eval_expr(Expr::mk_sub(L(5), L(3))) == 2);
  CHECK(eval_expr(Expr::mk_add(L(3), L(1))) == 4);

  Subst s;
  s.map["x"] = L(7);
  CHECK(eval_expr(V("x"), s) == 7);

  // x+x with x=2 gives 4, the doubled value of the running example
  s.map["x"] = L(2);
  CHECK(eval_expr(Expr::mk_add(V("x"), V("x")), s) == 4);

  CHECK_THROWS_AS(eval_expr(V("y"), s), EvalError);
  CHECK_THROWS_AS(
      eval_expr(Expr::mk_add(L(std::numeric_limits<Value>::max()), L(1))),
      EvalError);
}

TEST_CASE("boolean evaluation") {
  CHECK(eval_bool(BoolExpr::mk_leq(L(2), L(9))));
  CHECK(eval_bool(BoolExpr::mk_not(BoolExpr::mk_leq(L(1), L(0)))));
  Subst s;
  s.map["x"] = L(4);
  auto b = BoolExpr::mk_and(BoolExpr::mk_leq(V("x"), L(9)),
                            BoolExpr::mk_not(BoolExpr::mk_leq(V("x"), L(9))));
  CHECK_FALSE(eval_bool(b, s));
  CHECK(eval_bool(BoolExpr::mk_true()));
  CHECK_FALSE(eval_bool(BoolExpr::mk_false()));
}

TEST_CASE("substitution") {
  DefTable defs;
  // c1!(x, x+x) with x:=2 becomes c1!(2, 2+2)
  ProcPtr p = Process::mk_out("c1", {V("x"), Expr::mk_add(V("x"), V("x"))});
  Subst s;
  s.map["x"] = L(2);
  ProcPtr q = substitute(p, s);
  CHECK(print(q) == "c1!(2,2 + 2)");

  // bound occurrences stay untouched
  ProcPtr r = Process::mk_in("c", {"x"}, Process::mk_out("d", {V("x")}));
  s.map.clear();
  s.map["x"] = L(5);
  CHECK(equal(substitute(r, s), r));

  // one free and one bound occurrence of the same name
  ProcPtr both = Process::mk_par(
      Process::mk_out("d", {V("y")}),
      Process::mk_in("c", {"y"}, Process::mk_nil()));
  s.map.clear();
  s.map["y"] = L(1);
  ProcPtr both2 = substitute(both, s);
  CHECK(print(both2) == "d!(1) | c?(y).0");

  // capture avoidance when the image mentions a binder name
  ProcPtr cap = Process::mk_in("c", {"y"}, Process::mk_out("d", {V("x")}));
  s.map.clear();
  s.map["x"] = V("y");
  ProcPtr cap2 = substitute(cap, s);
  // the received y must not capture the substituted y
  CHECK(free_vars(cap2).count("y") == 1);
  auto inner = cap2->cont;
  CHECK(cap2->params[0] != "y");
}

TEST_CASE("substitution composition (disjoint closed)") {
  GenSpec spec;
  spec.seed = 11;
  std::mt19937_64 rng(spec.seed);
  DefTable defs;
  for (int i = 0; i < 60; ++i) {
    ProcPtr p = gen_process(spec, rng);
    auto fv = free_vars(p);
    Subst s1, s2, both;
    int k = 0;
    for (auto& x : fv) {
      auto img = L(static_cast<Value>(rng() % 7));
      (k++ % 2 ? s1 : s2).map[x] = img;
      both.map[x] = img;
    }
    ProcPtr a = substitute(substitute(p, s1), s2);
    ProcPtr b = substitute(p, both);
    CHECK(struct_eq(a, b, defs));
  }
}

TEST_CASE("expression substitution agrees with evaluation (Assumption 2.1)") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    // build a random small expression over x, y
    std::function<ExprPtr(int)> mk = [&](int d) -> ExprPtr {
      switch (rng() % (d > 0 ? 4 : 2)) {
        case 0: return L(static_cast<Value>(rng() % 9) - 4);
        case 1: return rng() % 2 ? V("x") : V("y");
        case 2: return Expr::mk_add(mk(d - 1), mk(d - 1));
        default: return Expr::mk_sub(mk(d - 1), mk(d - 1));
      }
    };
    ExprPtr e1 = mk(3);
    ExprPtr ex = mk(2), ey = mk(2);  // possibly open images
    Subst values;
    values.map["x"] = L(static_cast<Value>(rng() % 5));
    values.map["y"] = L(static_cast<Value>(rng() % 5));
    // close the images first
    ExprPtr vx = L(eval_expr(ex, values)), vy = L(eval_expr(ey, values));
    Subst with_values, with_exprs;
    with_values.map = {{"x", vx}, {"y", vy}};
    with_exprs.map = {{"x", subst_expr(ex, values)},
                      {"y", subst_expr(ey, values)}};
    CHECK(eval_expr(subst_expr(e1, with_values)) ==
          eval_expr(subst_expr(e1, with_exprs)));
  }
}

TEST_CASE("double negation") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    Value a = static_cast<Value>(rng() % 11) - 5;
    Value b = static_cast<Value>(rng() % 11) - 5;
    BoolPtr base = BoolExpr::mk_leq(L(a), L(b));
    if (rng() % 2) base = BoolExpr::mk_and(base, BoolExpr::mk_leq(L(b), L(a)));
    CHECK(eval_bool(BoolExpr::mk_not(BoolExpr::mk_not(base))) ==
          eval_bool(base));
  }
}

TEST_CASE("channel renaming") {
  DefTable defs;
  defs.add("Prt", {"i", "j"},
           Process::mk_in("r", {}, Process::mk_out("r3x", {})));
  // renaming a free channel in a call body via the effective map
  ProcPtr call = Process::mk_call("Prt", {L(1), L(2)}, {{"r3", "r"}});
  auto eff = call_effective_map(*call, defs);
  CHECK(eff.at("r") == "r3");
  CHECK(eff.at("r3x") == "r3x");

  // empty renaming is the identity
  ProcPtr p = Process::mk_out("c", {L(1)});
  CHECK(equal(rename_channels(p, {}, defs), p));

  // a binder shields the renaming and is alpha-renamed on capture
  ProcPtr n = Process::mk_new("c", Process::mk_out("c", {}));
  ProcPtr renamed = rename_channels(n, {{"d", "c"}}, defs);
  CHECK(struct_eq(renamed, n, defs));  // nothing free to rename

  ProcPtr m = Process::mk_new(
      "c", Process::mk_par(Process::mk_out("c", {}),
                           Process::mk_out("e", {})));
  ProcPtr renamed2 = rename_channels(m, {{"c", "e"}}, defs);
  // free e became c; the binder had to move out of the way
  CHECK(free_chans(renamed2, defs) == std::set<Name>{"c"});
  CHECK(renamed2->chan != "c");
}

TEST_CASE("unfolding calls") {
  DefTable defs;
  defs.add("K", {"x"},
           Process::mk_out("r", {Expr::mk_add(V("x"), V("x"))}));
  ProcPtr call = Process::mk_call("K", {L(3)}, {{"s", "r"}});
  ProcPtr body = unfold_call(*call, defs);
  CHECK(print(body) == "s!(3 + 3)");

  ProcPtr bad = Process::mk_call("K", {});
  CHECK_THROWS(unfold_call(*bad, defs));
}
