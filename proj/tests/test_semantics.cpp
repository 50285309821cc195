#include "doctest.h"
#include "permccs/corpus.hpp"
#include "permccs/parse.hpp"
#include "permccs/print.hpp"
#include "permccs/semantics.hpp"

using namespace permccs;

namespace {

DefTable kNoDefs;

ProcPtr P(const std::string& s) { return parse_process_term(s, kNoDefs); }

}  // namespace

TEST_CASE("canonical forms decide the structural rules") {
  DefTable d;
  // sNil
  CHECK(struct_eq(P("c!(1) | 0"), P("c!(1)"), d));
  // sCom, sAss
  CHECK(struct_eq(P("a!() | (b!() | c!())"), P("(c!() | b!()) | a!()"), d));
  // sNew
  CHECK(struct_eq(P("new c.0"), P("0"), d));
  // sSwp
  CHECK(struct_eq(P("new c,d.(c!(1) | d!(2))"), P("new d,c.(c!(1) | d!(2))"),
                  d));
  // sExt with the freshness side condition
  CHECK(struct_eq(P("a!() | new c.c!(1)"), P("new c.(a!() | c!(1))"), d));
  // the binder does not extrude over a use of the same free name
  CHECK_FALSE(struct_eq(P("c!(2) | new c.c!(1)"), P("new c.(c!(2) | c!(1))"),
                        d));
  // alpha
  CHECK(struct_eq(P("new c.(c!(1) | d?(x).c!(x))"),
                  P("new e.(e!(1) | d?(y).e!(y))"), d));
  // unused binders vanish
  CHECK(struct_eq(P("new c.d!(5)"), P("d!(5)"), d));
  // sorting is a congruence under prefixes
  CHECK(struct_eq(P("c?(x).(a!() | b!())"), P("c?(y).(b!() | a!())"), d));
  // distinct processes stay distinct
  CHECK_FALSE(struct_eq(P("c!(1)"), P("c!(2)"), d));
  CHECK_FALSE(struct_eq(P("c!(1) | c!(1)"), P("c!(1)"), d));
}

TEST_CASE("one-step reduction") {
  DefTable d;
  SUBCASE("communication substitutes the received values") {
    auto steps = step(P("c1!(4) | c1?(x).d!(x)"), d);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == ProcRule::rCom);
    CHECK(print(steps[0].result) == "d!(4)");
  }
  SUBCASE("conditionals") {
    auto t = step(P("if 2 <= 9 then a!() else b!()"), d);
    REQUIRE(t.size() == 1);
    CHECK(t[0].rule == ProcRule::rThn);
    CHECK(print(t[0].result) == "a!()");
    auto e = step(P("if 10 <= 9 then a!() else b!()"), d);
    REQUIRE(e.size() == 1);
    CHECK(e[0].rule == ProcRule::rEls);
  }
  SUBCASE("mismatched arities do not communicate") {
    CHECK(step(P("c!(1,2) | c?(x).0"), d).empty());
  }
  SUBCASE("restriction does not block internal communication") {
    auto steps = step(P("new c.(c!(7) | c?(x).d!(x))"), d);
    REQUIRE(steps.size() == 1);
    CHECK(struct_eq(steps[0].result, P("d!(7)"), d));
  }
  SUBCASE("calls unfold") {
    DefTable t;
    t.add("K", {}, P("c!(1)"));
    auto steps = step(Process::mk_call("K", {}), t);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == ProcRule::rPrc);
  }
}

TEST_CASE("racing outputs yield two successors") {
  DefTable d;
  auto steps = step(P("c!(1) | c!(2) | c?(x).d!(x)"), d);
  CHECK(steps.size() == 2);
}

TEST_CASE("evaluation of the running example (Prg)") {
  DefTable defs = build_prg();

  SUBCASE("small first input doubles deterministically") {
    auto r = evaluate(prg_with_inputs(2, 5), defs);
    REQUIRE(r.stable.size() == 1);
    CHECK(struct_eq(r.stable[0].norm, P("c4!() | c1!(2,4)"), defs));
  }
  SUBCASE("large first input routes to c4 and blocks the doubler") {
    auto r = evaluate(prg_with_inputs(10, 5), defs);
    REQUIRE(r.stable.size() == 1);
    CHECK(struct_eq(r.stable[0].norm,
                    P("c4!(10) | new c3.c3?(x4).c1!(x4+x4)"), defs));
  }
  SUBCASE("nil is stable immediately") {
    auto r = evaluate(P("0"), defs);
    REQUIRE(r.stable.size() == 1);
    CHECK(r.stable[0].norm->kind == Process::Kind::Nil);
  }
}

TEST_CASE("determinism verdicts") {
  DefTable defs = build_prg();

  SUBCASE("race-free contexts are deterministic") {
    auto r = is_deterministic(prg_with_inputs(2, 5), defs);
    CHECK(r.verdict == Determinism::Deterministic);
  }

  SUBCASE("a second output on c1 races") {
    ProcPtr p = Process::mk_par(prg_with_inputs(1, 0),
                                Process::mk_out("c1", {Expr::mk_lit(3)}));
    auto r = is_deterministic(p, defs);
    CHECK(r.verdict == Determinism::NonDeterministic);
    REQUIRE(r.witness1);
    REQUIRE(r.witness2);
    CHECK_FALSE(struct_eq(r.witness1, r.witness2, defs));
  }

  SUBCASE("self-recursion diverges") {
    DefTable t;
    t.add("Loop", {}, Process::mk_call("Loop", {}));
    auto r = is_deterministic(Process::mk_call("Loop", {}), t);
    CHECK(r.verdict == Determinism::Diverges);
  }

  SUBCASE("budget exhaustion is reported as unknown") {
    DefTable t;
    // an unfolding chain longer than the budget
    t.add("Count", {"n"},
          Process::mk_if(
              BoolExpr::mk_leq(Expr::mk_var("n"), Expr::mk_lit(0)),
              Process::mk_nil(),
              Process::mk_call("Count", {Expr::mk_sub(Expr::mk_var("n"),
                                                      Expr::mk_lit(1))})));
    ExploreConfig cfg;
    cfg.budget = 20;
    auto r = is_deterministic(
        Process::mk_call("Count", {Expr::mk_lit(100)}), t, cfg);
    CHECK(r.verdict == Determinism::Unknown);
  }
}

TEST_CASE("evaluate results are stable") {
  DefTable defs = build_prg();
  auto r = evaluate(prg_with_inputs(4, 1), defs);
  for (auto& c : r.stable) CHECK(step(c.norm, defs).empty());
}
