#include <fstream>
#include <sstream>

#include "doctest.h"
#include "permccs/corpus.hpp"
#include "permccs/parse.hpp"
#include "permccs/print.hpp"
#include "permccs/proof.hpp"

using namespace permccs;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(PERMCCS_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BoolPtr B(const std::string& s) { return parse_bool(s); }
FormulaPtr F(const std::string& s) { return parse_formula(s); }

}  // namespace

TEST_CASE("boolean entailment") {
  SUBCASE("contradictory conditions prove false") {
    auto r = bool_entails(B("x <= 9 && !(x <= 9)"), B("false"));
    CHECK(r.verdict == EntailVerdict::Valid);
  }
  SUBCASE("linear identities are proven by the frontend") {
    CHECK(bool_entails(B("true"), B("x+x = x+x")).verdict ==
          EntailVerdict::Valid);
    CHECK(bool_entails(B("x = y"), B("x <= y")).verdict ==
          EntailVerdict::Valid);
    CHECK(bool_entails(B("x <= 4 && 6 <= x"), B("false")).verdict ==
          EntailVerdict::Valid);
    CHECK(bool_entails(B("x < y && y < z"), B("x < z")).verdict ==
          EntailVerdict::Valid);
  }
  SUBCASE("counterexamples carry a witness") {
    auto r = bool_entails(B("x <= 5"), B("x <= 3"));
    REQUIRE(r.verdict == EntailVerdict::Refuted);
    CHECK(eval_expr(r.witness.map.at("x")) == 4);
  }
  SUBCASE("disjunctions narrow to bounded validity or validity") {
    auto r = bool_entails(B("x = 1 || x = 2"), B("x <= 2"));
    CHECK(r.verdict != EntailVerdict::Refuted);
  }
  SUBCASE("the variable cap is enforced") {
    CHECK_THROWS_AS(
        bool_entails(B("a <= b && c <= d && e <= f && g <= a"), B("false")),
        TooManyVariables);
  }
}

TEST_CASE("formula implication (monoid theory plus any)") {
  CHECK(formula_implies(F("emp * c|->(1)"), F("c|->(1)")));
  CHECK(formula_implies(F("c|->(1)"), F("emp * c|->(1)")));
  CHECK(formula_implies(F("a|->(1) * (b|->(2) * c|->(3))"),
                        F("(a|->(1) * b|->(2)) * c|->(3)")));
  CHECK_FALSE(formula_implies(F("c|->(1)"), F("c|->(2)")));
  CHECK(formula_implies(F("a|->(1) * blk b"), F("any")));
  CHECK(formula_implies(F("a|->(1) * blk b"), F("a|->(1) * any")));
  CHECK(formula_implies(F("emp"), F("any")));
  CHECK_FALSE(formula_implies(F("any"), F("emp")));
  CHECK_FALSE(formula_implies(F("a|->(1)"), F("a|->(1) * b|->(2)")));
}

TEST_CASE("the two running-example derivations are accepted") {
  for (auto file : {"ex61_eq5.proof", "ex61_eq52.proof"}) {
    CAPTURE(file);
    ProofScript script = parse_proof(slurp(file));
    CheckResult r = check_proof(script);
    for (auto& e : r.errors)
      MESSAGE(e.path, " ", e.rule, ": ", e.reason);
    CHECK(r.ok);
  }
}

TEST_CASE("accepted roots hold semantically on a sample grid") {
  ProofScript eq5 = parse_proof(slurp("ex61_eq5.proof"));
  REQUIRE(check_proof(eq5).ok);
  SemanticSpec spec;
  for (Value x : {0, 2, 5, 9})
    for (Value y : {1, 7}) {
      Subst s;
      s.map["x"] = Expr::mk_lit(x);
      s.map["y"] = Expr::mk_lit(y);
      spec.sigmas.push_back(s);
    }
  auto r = sequent_holds_semantically(eq5.root, eq5.defs, spec);
  CHECK(r.verdict == SemanticVerdict::BoundedValid);
  CHECK(r.points_checked >= 4);
}

TEST_CASE("a false sequent is caught by the semantic checker") {
  DefTable defs;
  Sequent sq;
  sq.env = parse_env("c : {c!}");
  sq.cond = B("true");
  sq.pre = F("emp");
  sq.sys = parse_system_term("<c!>{ c!(1) }", defs);
  sq.post = F("c|->(2)");
  SemanticSpec spec;
  spec.sigmas.push_back(Subst{});
  auto r = sequent_holds_semantically(sq, defs, spec);
  CHECK(r.verdict == SemanticVerdict::Counterexample);
}

TEST_CASE("mutations are rejected at the mutated node") {
  ProofScript script = parse_proof(slurp("ex61_eq5.proof"));
  REQUIRE(check_proof(script).ok);

  SUBCASE("dropping a permission from an lSpl split") {
    ProofScript m = script;
    // the first lSpl sits at path 0.0.0
    ProofNode* n = &m.tree.children[0].children[0].children[0];
    REQUIRE(n->rule == Rule::lSpl);
    n->inst.left_perms = parse_perm_set("c3!,c4!");  // lost c1?
    auto r = check_proof(m);
    CHECK_FALSE(r.ok);
  }
  SUBCASE("breaking the cut formula") {
    ProofScript m = script;
    ProofNode* cut = &m.tree;
    std::string path;
    while (cut->rule != Rule::lCut) {
      REQUIRE_FALSE(cut->children.empty());
      cut = &cut->children[0];
      path += path.empty() ? "0" : ".0";
    }
    cut->inst.cut = F("c3|->(x+1)");
    auto r = check_proof(m);
    REQUIRE_FALSE(r.ok);
    // the failure is localized at or below the mutated node
    for (auto& e : r.errors)
      CHECK(e.path.substr(0, path.size()) == path);
  }
  SUBCASE("swapping pre and post") {
    ProofScript m = script;
    std::swap(m.root.pre, m.root.post);
    CHECK_FALSE(check_proof(m).ok);
  }
  SUBCASE("renaming the rule at a leaf") {
    ProofScript m = script;
    ProofNode* n = &m.tree;
    while (!n->children.empty()) n = &n->children[0];
    n->rule = Rule::lNil;
    CHECK_FALSE(check_proof(m).ok);
  }
}

TEST_CASE("premise counting") {
  ProofScript script = parse_proof(slurp("ex61_eq5.proof"));
  script.tree.children.clear();  // lDef now lacks its premise
  auto r = check_proof(script);
  REQUIRE_FALSE(r.ok);
  CHECK(r.errors[0].path == "");
}

TEST_CASE("lNil accepts any matching pre/post pair") {
  DefTable defs;
  ProofScript s;
  s.defs = defs;
  s.root = parse_sequent(
      "env c : {c!} ; bool true |- { c|->(1) * blk d } <a!>{ 0 } "
      "{ blk d * c|->(1) }",
      defs);
  s.tree.rule = Rule::lNil;
  CHECK(check_proof(s).ok);
}
