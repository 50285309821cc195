#include <random>

#include "doctest.h"
#include "permccs/corpus.hpp"
#include "permccs/gen.hpp"
#include "permccs/parse.hpp"
#include "permccs/print.hpp"
#include "permccs/semantics.hpp"
#include "permccs/confined.hpp"

using namespace permccs;

TEST_CASE("process parsing") {
  auto f = parse_process("c1!(4)");
  CHECK(f.main->kind == Process::Kind::Out);
  CHECK(f.main->chan == "c1");
  CHECK(eval_expr(f.main->args[0]) == 4);

  auto g = parse_process("c1?(x).if x <= 9 then c3!(x) else c4!(x)");
  CHECK(g.main->kind == Process::Kind::In);
  CHECK(g.main->cont->kind == Process::Kind::If);

  auto h = parse_process(
      "def Dbl() = c2?(x2).c3?(x4).c1!(x4+x4)\n"
      "Dbl()");
  CHECK(h.defs.has("Dbl"));
  CHECK(h.defs.at("Dbl").params.empty());
  CHECK(h.main->kind == Process::Kind::Call);

  CHECK_THROWS_AS(parse_process("Unknown()"), ParseError);
  CHECK_THROWS_AS(parse_process("def K(x) = c!(x)\nK(1,2)"), ParseError);
  CHECK_THROWS_AS(parse_process("def K() = c!(y)\nK()"), ParseError);
  CHECK_THROWS_AS(parse_process("c1!(4"), ParseError);
}

TEST_CASE("system parsing") {
  auto f = parse_system("<c1!>{ c1!(2) }");
  CHECK(f.main->kind == System::Kind::Leaf);
  CHECK(f.main->perms.contains(perm_out("c1")));

  auto g = parse_system("<>{ 0 }");
  CHECK(g.main->perms.empty());
  CHECK(g.main->proc->kind == Process::Kind::Nil);

  auto h = parse_system(
      "def Fltr() = c1?(x1).c3!(x1)\n"
      "def Dbl() = c2?(x2).c3?(x4).c1!(x4+x4)\n"
      "new c3.(<c1?,c3!>{ Fltr() } | <c2?,c3?>{ Dbl() })");
  CHECK(h.main->kind == System::Kind::New);

  CHECK_THROWS_AS(parse_system("<c1!,c1!>{ 0 }"), ParseError);
  // non-separate parallel components are rejected at construction
  CHECK_THROWS_AS(parse_system("<c1!>{ 0 } | <c1!>{ 0 }"),
                  WellResourcingError);
}

TEST_CASE("formula and environment parsing") {
  auto f = parse_formula("c1|->(2,4) * c4|->()");
  CHECK(f->kind == Formula::Kind::Sep);
  CHECK(f->left->chan == "c1");
  CHECK(f->right->args.empty());

  CHECK(parse_formula("emp")->kind == Formula::Kind::Emp);
  CHECK(parse_formula("any")->kind == Formula::Kind::Any);
  CHECK(parse_formula("blk c3")->chan == "c3");

  auto env = parse_env("c1 : {c1!}; c2 : {c2!}; c4 : {c4!, c1?}");
  CHECK(env.map.size() == 3);
  CHECK(env.at("c4").contains(perm_in("c1")));

  // Def 4.1 violations
  CHECK_THROWS_AS(parse_env("c : {c?, c!}"), ParseError);
  CHECK_THROWS_AS(parse_env("c : {}"), ParseError);
  CHECK_THROWS_AS(parse_env("c : {c!, d!}"), ParseError);
}

TEST_CASE("sequent parsing") {
  DefTable defs = build_prg();
  auto sq = parse_sequent(
      "env c1 : {c1!}; c2 : {c2!}; c4 : {c4!, c1?} ; bool x <= 9 |- "
      "{ c1|->(x) * c2|->(y) } <c1?,c2?,c4!>{ Prg() } "
      "{ c1|->(x, x+x) * c4|->() }",
      defs);
  CHECK(sq.env.map.size() == 3);
  CHECK(free_vars(sq.pre) == std::set<Name>{"x", "y"});
  CHECK(sq.sys->proc->kind == Process::Kind::Call);
}

TEST_CASE("print/parse round trip on the corpus definitions") {
  DefTable defs = build_prg();
  for (auto& [name, def] : defs.defs) {
    ProcPtr back = parse_process_term(print(def.body), defs);
    CHECK(struct_eq(back, def.body, defs));
  }
  DefTable qs = build_quicksort(3);
  for (auto& [name, def] : qs.defs) {
    ProcPtr back = parse_process_term(print(def.body), qs);
    CHECK(struct_eq(back, def.body, qs));
  }
}

TEST_CASE("print/parse round trip on random terms") {
  GenSpec spec;
  spec.seed = 21;
  std::mt19937_64 rng(spec.seed);
  DefTable defs;
  for (int i = 0; i < 150; ++i) {
    ProcPtr p = gen_process(spec, rng);
    ProcPtr back = parse_process_term(print(p), defs);
    CHECK(struct_eq(p, back, defs));
  }
  for (int i = 0; i < 100; ++i) {
    SysPtr s = gen_system(spec, rng);
    SysPtr back = parse_system_term(print(s), defs);
    CHECK(sys_struct_eq(s, back, defs));
  }
}

TEST_CASE("bool expression round trip") {
  for (auto text : {"x <= 9", "!(x <= 9)", "x <= 9 && y <= 2",
                    "x = y", "x < y", "x <= 9 || y <= 2", "x <= 9 => y <= 2",
                    "true", "false"}) {
    BoolPtr b = parse_bool(text);
    BoolPtr back = parse_bool(print(b));
    CHECK(compare(b, back) == 0);
  }
}

TEST_CASE("formula round trip") {
  for (auto text :
       {"emp", "any", "blk c", "c|->(1, x+1)", "emp * (any * blk c)",
        "c|->() * d|->(2) * blk e"}) {
    FormulaPtr f = parse_formula(text);
    CHECK(compare(parse_formula(print(f)), f) == 0);
  }
}
