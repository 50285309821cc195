#include "doctest.h"
#include "permccs/confined.hpp"
#include "permccs/corpus.hpp"
#include "permccs/parse.hpp"
#include "permccs/print.hpp"

using namespace permccs;

namespace {

DefTable kNoDefs;

SysPtr S(const std::string& s) { return parse_system_term(s, kNoDefs); }
ProcPtr P(const std::string& s) { return parse_process_term(s, kNoDefs); }

// the eq. (83) narrative for Prg | c1!2 | c2!5
SysPtr prg_narrative_83(const DefTable& defs) {
  return parse_system_term(
      "<c1?,c2?,c4!>{ Prg() } | <c1!>{ c1!(2) } | <c2!>{ c2!(5) }", defs);
}

// the eq. (84) narrative: c4! travels with the first context output
SysPtr prg_narrative_84(const DefTable& defs) {
  return parse_system_term(
      "<c1?,c2?>{ Prg() } | <c1!,c4!>{ c1!(2) } | <c2!>{ c2!(5) }", defs);
}

}  // namespace

TEST_CASE("owned permissions") {
  DefTable defs = build_prg();
  auto s = parse_system_term("<c1?,c2?,c4!>{ Prg() }", defs);
  PermSet want{perm_in("c1"), perm_in("c2"), perm_out("c4")};
  CHECK(owned_perms(s) == want);

  auto r = S("new c.<c?,c!,d!>{ 0 }");
  CHECK(owned_perms(r) == PermSet{perm_out("d")});

  CHECK(owned_perms(S("<>{ 0 }")).empty());
}

TEST_CASE("separation") {
  CHECK(separate(S("<c1?>{ c1?(x).0 }"), S("<c1!>{ c1!(1) }")));
  DefTable defs = build_prg();
  auto prg = parse_system_term("<c1?,c2?,c4!>{ Prg() }", defs);
  auto ctx = S("<c1?,c2!>{ c1!(1) | c2!(3) | c1?(x).0 }");
  CHECK_FALSE(separate(prg, ctx));
  CHECK(separate(prg, S("<>{ 0 }")));
}

TEST_CASE("violation detection") {
  DefTable d;
  CHECK(has_violation(S("<>{ c1!(2) }"), d).has_value());
  CHECK_FALSE(has_violation(S("<c!>{ c!(1) }"), d).has_value());
  // a composite confined body is not a violation before splitting
  CHECK_FALSE(has_violation(S("<c!>{ c!(1) | d!(2) }"), d).has_value());
  // the closure sees through structural rearrangement inside the leaf
  CHECK(has_violation(S("<c?>{ 0 | d!(2) }"), d).has_value());
  CHECK(has_violation(S("<>{ c?(x).0 }"), d).has_value());
  // a restricted body is not yet an exposed input or output
  CHECK_FALSE(has_violation(S("<>{ new d.d!(1) }"), d).has_value());
}

TEST_CASE("erasure") {
  DefTable defs = build_prg();
  auto s = parse_system_term("<c1?>{ Prg() }", defs);
  CHECK(erase(s)->kind == Process::Kind::Call);
  auto r = S("new c.(<a!>{ a!(1) } | <b!>{ b!(2) })");
  CHECK(struct_eq(erase(r), P("new c.(a!(1) | b!(2))"), defs));

  // the eq. (112) terminal system erases to the expected soup
  auto t = S("<c1!,c2?,c2!>{ c1!(2,4) } | <c1?,c4!>{ c4!() }");
  CHECK(struct_eq(erase(t), P("c1!(2,4) | c4!()"), defs));
}

TEST_CASE("equivalence up to owned permissions") {
  DefTable d;
  CHECK(quaseq(S("<a!>{ c!(1) }"), S("<b?,c!>{ c!(1) }"), d));
  CHECK(quaseq(S("<a!>{ 0 } | <c!>{ c!(1) }"), S("<>{ c!(1) }"), d));
  // leaf boundaries are respected: a joint leaf is not two leaves
  CHECK_FALSE(quaseq(S("<a!,b!>{ a!(1) | b!(2) }"),
                     S("<a!>{ a!(1) } | <b!>{ b!(2) }"), d));
  auto s = S("new c.(<c?>{ c?(x).0 } | <c!>{ c!(5) })");
  CHECK(quaseq(s, s, d));
}

TEST_CASE("confined one-step successors") {
  DefTable defs = build_prg();

  SUBCASE("cLcl opens the scoped doubler channel") {
    // unfolding Prg and then cLcl reaches the eq. (86) shape
    auto s0 = prg_narrative_83(defs);
    auto first = sys_step(s0, defs);
    REQUIRE(first.size() == 1);  // only cPrc on the call
    CHECK(first[0].rule == SysRule::cPrc);
    auto second = sys_step(first[0].result, defs);
    REQUIRE(second.size() == 1);
    CHECK(second[0].rule == SysRule::cLcl);
    auto eq86 = parse_system_term(
        "new c3.(<c1?,c2?,c4!,c3!,c3?>{ Fltr() | Dbl() } "
        "| <c1!>{ c1!(2) } | <c2!>{ c2!(5) })",
        defs);
    CHECK(sys_struct_eq(second[0].result, eq86, defs));
  }

  SUBCASE("cCom requires the receiver permission") {
    auto s = S("<c!>{ c!(1) } | <>{ c?(x).0 }");
    for (auto& st : sys_step(s, kNoDefs)) CHECK(st.rule != SysRule::cCom);
  }

  SUBCASE("cCom transfers the sender permissions") {
    auto s = S("<c!,d!>{ c!(1) } | <c?>{ c?(x).d?(y).0 }");
    auto steps = sys_step(s, kNoDefs);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].rule == SysRule::cCom);
    auto v = owned_perms(steps[0].result);
    CHECK(v.contains(perm_out("d")));
    CHECK(v.contains(perm_in("c")));
    CHECK(v.contains(perm_out("c")));
  }

  SUBCASE("cSpl enumerates the permission partitions") {
    auto s = S("<a!,b!>{ a!(1) | b!(2) }");
    int spl = 0;
    for (auto& st : sys_step(s, kNoDefs))
      if (st.rule == SysRule::cSpl) ++spl;
    CHECK(spl == 4);  // one body split times 2^2 permission splits
  }

  SUBCASE("cDsc clears leftover permissions on inert leaves") {
    auto s = S("<a!>{ 0 } | <b!>{ b!(1) }");
    bool found = false;
    for (auto& st : sys_step(s, kNoDefs))
      if (st.rule == SysRule::cDsc) found = true;
    CHECK(found);
  }

  SUBCASE("cTgh sheds scoped permissions from a leaf not using the name") {
    auto s = S("new c.(<c!,a!>{ a!(1) } | <c?>{ c?(x).0 })");
    bool found = false;
    for (auto& st : sys_step(s, kNoDefs))
      if (st.rule == SysRule::cTgh) {
        found = true;
        CHECK_FALSE(owned_perms(st.result).contains(perm_out("c")));
      }
    CHECK(found);
  }

  SUBCASE("the split cap guards the enumeration") {
    PermSet big;
    for (int i = 0; i < 16; ++i)
      big.insert(perm_out("k" + std::to_string(i)));
    auto leaf = System::mk_leaf(big, P("a!() | b!()"));
    CHECK_THROWS_AS(sys_step(leaf, kNoDefs), CapExceeded);
  }
}

TEST_CASE("safe stability") {
  DefTable d;
  // the eq. (112) terminal system
  auto t = S("<c1!,c2?,c2!>{ c1!(2,4) } | <c1?,c4!>{ c4!() }");
  CHECK(is_safely_stable(t, d));
  CHECK(is_safely_stable_structural(t, d));
  // a communicating pair is not stable
  CHECK_FALSE(is_safely_stable(S("<c!>{ c!(1) } | <c?>{ c?(x).0 }"), d));
  // a violating output is stable but unsafe
  CHECK_FALSE(is_safely_stable(S("<>{ d!(1) }"), d));
  CHECK(is_safely_stable(S("<>{ 0 }"), d));
}

TEST_CASE("safe evaluation of the running example") {
  DefTable defs = build_prg();
  ProcPtr expected = P("c1!(2,4) | c4!()");

  SUBCASE("narrative eq. (83)") {
    auto r = evaluate_safe(prg_narrative_83(defs), defs);
    REQUIRE(r.status == SafeEvalStatus::Found);
    CHECK(struct_eq(erase(r.result), expected, defs));
    CHECK(r.trace.size() >= 8);
  }
  SUBCASE("narrative eq. (84)") {
    auto r = evaluate_safe(prg_narrative_84(defs), defs);
    REQUIRE(r.status == SafeEvalStatus::Found);
    CHECK(struct_eq(erase(r.result), expected, defs));
  }
  SUBCASE("a missing permission never evaluates safely") {
    auto r = evaluate_safe(S("<>{ c!(1) }"), kNoDefs);
    CHECK(r.status == SafeEvalStatus::NoneProven);
    CHECK(!r.violation_witness.empty());
  }
  SUBCASE("the eq. (112) terminal permission split is reachable") {
    auto ex = explore_safe(prg_narrative_83(defs), defs);
    CHECK_FALSE(ex.truncated);
    auto eq112 =
        S("<c1!,c2?,c2!>{ c1!(2,4) } | <c1?,c4!>{ c4!() }");
    std::string want = canon_system(eq112, defs).key;
    bool found = false;
    for (auto& t : ex.stable)
      if (canon_system(t, defs).key == want) found = true;
    CHECK(found);
  }
}

TEST_CASE("determinism certification") {
  DefTable defs = build_prg();
  auto r = certify_deterministic(prg_narrative_83(defs), defs);
  REQUIRE(r.certified);
  CHECK(struct_eq(r.result.norm, P("c1!(2,4) | c4!()"), defs));

  auto unit = certify_deterministic(S("<>{ 0 }"), kNoDefs);
  REQUIRE(unit.certified);
  CHECK(unit.result.norm->kind == Process::Kind::Nil);

  auto bad = certify_deterministic(S("<>{ c!(1) }"), kNoDefs);
  CHECK_FALSE(bad.certified);
}
