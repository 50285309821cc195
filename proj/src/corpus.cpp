#include "permccs/corpus.hpp"

#include <stdexcept>

namespace permccs {

namespace {

ExprPtr var(const Name& x) { return Expr::mk_var(x); }
ExprPtr lit(Value v) { return Expr::mk_lit(v); }

ProcPtr out(const Name& c, std::vector<ExprPtr> args) {
  return Process::mk_out(c, std::move(args));
}
ProcPtr in(const Name& c, std::vector<Name> xs, ProcPtr k) {
  return Process::mk_in(c, std::move(xs), std::move(k));
}
ProcPtr par(std::initializer_list<ProcPtr> ps) {
  auto it = std::rbegin(ps);
  ProcPtr r = *it;
  for (++it; it != std::rend(ps); ++it) r = Process::mk_par(*it, r);
  return r;
}

}  // namespace

DefTable build_prg() {
  DefTable t;
  // Dbl() = c2?(x2).c3?(x4).c1!(x4+x4)
  t.add("Dbl", {},
        in("c2", {"x2"},
           in("c3", {"x4"},
              out("c1", {Expr::mk_add(var("x4"), var("x4"))}))));
  // Fltr() = c1?(x1).if x1 <= 9 then c3!(x1) | c1?(x3).(c1!(x1,x3) | c4!())
  //          else c4!(x1)
  t.add("Fltr", {},
        in("c1", {"x1"},
           Process::mk_if(
               BoolExpr::mk_leq(var("x1"), lit(9)),
               par({out("c3", {var("x1")}),
                    in("c1", {"x3"},
                       par({out("c1", {var("x1"), var("x3")}),
                            out("c4", {})}))}),
               out("c4", {var("x1")}))));
  // Prg() = new c3.(Fltr() | Dbl())
  t.add("Prg", {},
        Process::mk_new("c3", par({Process::mk_call("Fltr", {}),
                                   Process::mk_call("Dbl", {})})));
  return t;
}

ProcPtr prg_with_inputs(Value v1, Value v2) {
  return par({Process::mk_call("Prg", {}), out("c1", {lit(v1)}),
              out("c2", {lit(v2)})});
}

// ---------------------------------------------------------------------------
// quicksort

Name array_chan(int i) { return "a" + std::to_string(i); }
Name qck_name(int i, int j) {
  return "Qck_" + std::to_string(i) + "_" + std::to_string(j);
}

namespace {

Name prt_name(int i, int j) {
  return "Prt_" + std::to_string(i) + "_" + std::to_string(j);
}
Name trv_name(int i, int j, int p, int c) {
  return "Trv_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
         std::to_string(p) + "_" + std::to_string(c);
}

// new r1,r2.( Qck_i_{p-1}[r1/r] | Qck_{p+1}_j[r2/r] | r1?().r2?().r!() )
ProcPtr recurse_at(int i, int j, int p) {
  ProcPtr body =
      par({Process::mk_call(qck_name(i, p - 1), {}, {{"r1", "r"}}),
           Process::mk_call(qck_name(p + 1, j), {}, {{"r2", "r"}}),
           in("r1", {}, in("r2", {}, out("r", {})))});
  return Process::mk_new(std::vector<Name>{"r1", "r2"}, body);
}

// the pivot index received on r3 selects the recursion split
ProcPtr dispatch(int i, int j) {
  ProcPtr arm = recurse_at(i, j, j);
  for (int p = j - 1; p >= i; --p)
    arm = Process::mk_if(BoolExpr::mk_eq(var("x"), lit(p)),
                         recurse_at(i, j, p), arm);
  return arm;
}

}  // namespace

DefTable build_quicksort(int n) {
  if (n <= 0) throw std::invalid_argument("array size must be positive");
  DefTable t;

  // traversal: l = i, h = j, pivot value x, pivot index p, counter c
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      for (int p = i; p <= j; ++p) {
        for (int c = p + 1; c <= j + 1; ++c) {
          ProcPtr body;
          if (c > j) {
            // restore the pivot and return its index
            if (i == p) {
              body = par({out(array_chan(i), {var("x")}), out("r", {lit(p)})});
            } else {
              body = in(array_chan(p), {"y"},
                        par({out(array_chan(i), {var("y")}),
                             out(array_chan(p), {var("x")}),
                             out("r", {lit(p)})}));
            }
          } else {
            ProcPtr keep =
                par({out(array_chan(c), {var("y")}),
                     Process::mk_call(trv_name(i, j, p, c + 1), {var("x")})});
            ProcPtr move;
            if (c == p + 1) {
              move = par({out(array_chan(c), {var("y")}),
                          Process::mk_call(trv_name(i, j, p + 1, c + 1),
                                           {var("x")})});
            } else {
              move = in(array_chan(p + 1), {"z"},
                        par({out(array_chan(c), {var("z")}),
                             out(array_chan(p + 1), {var("y")}),
                             Process::mk_call(trv_name(i, j, p + 1, c + 1),
                                              {var("x")})}));
            }
            body = in(array_chan(c), {"y"},
                      Process::mk_if(BoolExpr::mk_leq(var("x"), var("y")),
                                     keep, move));
          }
          t.add(trv_name(i, j, p, c), {"x"}, body);
        }
      }
      // Prt_i_j() = a_i?(x).Trv_i_j_i_{i+1}(x)
      t.add(prt_name(i, j), {},
            in(array_chan(i), {"x"},
               Process::mk_call(trv_name(i, j, i, i + 1), {var("x")})));
    }
  }

  // Qck_i_j for every interval arising in the recursion, including the
  // empty ones produced when the pivot sits at a boundary
  for (int i = 1; i <= n + 1; ++i) {
    for (int j = i - 1; j <= n; ++j) {
      if (j < 0) continue;
      ProcPtr body;
      if (i >= j) {
        body = out("r", {});  // empty or singleton interval: done
      } else {
        body = Process::mk_new(
            "r3",
            par({Process::mk_call(prt_name(i, j), {}, {{"r3", "r"}}),
                 in("r3", {"x"}, dispatch(i, j))}));
      }
      t.add(qck_name(i, j), {}, body);
    }
  }
  return t;
}

SysPtr encode_array(const std::vector<Value>& values, const DefTable& defs) {
  if (values.empty())
    throw std::invalid_argument("cannot encode an empty array");
  int n = static_cast<int>(values.size());
  PermSet sorter;
  for (int i = 1; i <= n; ++i) sorter.insert(perm_in(array_chan(i)));
  sorter.insert(perm_out("r"));
  SysPtr s =
      System::mk_leaf(sorter, Process::mk_call(qck_name(1, n), {}));
  for (int i = n; i >= 1; --i) {
    SysPtr cell = System::mk_leaf(PermSet{perm_out(array_chan(i))},
                                  out(array_chan(i), {lit(values[i - 1])}));
    s = System::mk_par(cell, s);
  }
  (void)defs;
  return s;
}

// ---------------------------------------------------------------------------
// specification macros

BoolPtr ord_formula(const std::vector<Name>& ys) {
  if (ys.size() <= 1) return BoolExpr::mk_true();
  BoolPtr b = BoolExpr::mk_leq(var(ys[0]), var(ys[1]));
  for (size_t k = 1; k + 1 < ys.size(); ++k)
    b = BoolExpr::mk_and(b, BoolExpr::mk_leq(var(ys[k]), var(ys[k + 1])));
  return b;
}

BoolPtr veq_formula(const std::vector<Name>& xs, const std::vector<Name>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("veq over lists of different lengths");
  if (xs.size() <= 1) return BoolExpr::mk_true();
  // ys is some reordering of xs: the head of xs sits at position k and the
  // rest matches recursively
  BoolPtr result;
  for (size_t k = 0; k < ys.size(); ++k) {
    // ys == ys[0..k-1] ++ [xs[0]] ++ ys[k+1..]
    BoolPtr head = BoolExpr::mk_eq(var(ys[k]), var(xs[0]));
    std::vector<Name> rest_y;
    for (size_t m = 0; m < ys.size(); ++m)
      if (m != k) rest_y.push_back(ys[m]);
    std::vector<Name> rest_x(xs.begin() + 1, xs.end());
    BoolPtr arm = BoolExpr::mk_and(head, veq_formula(rest_x, rest_y));
    result = result ? BoolExpr::mk_or(result, arm) : arm;
  }
  return result;
}

FormulaPtr arr_formula(int i, int j, const std::string& family) {
  if (i > j) return Formula::mk_emp();
  FormulaPtr f = Formula::mk_state(array_chan(i),
                                   {var(family + std::to_string(i))});
  for (int k = i + 1; k <= j; ++k)
    f = Formula::mk_sep(
        f, Formula::mk_state(array_chan(k), {var(family + std::to_string(k))}));
  return f;
}

QuicksortSpec gen_spec_formulas(int i, int j) {
  QuicksortSpec spec;
  std::vector<Name> xs, ys;
  for (int k = i; k <= j; ++k) {
    xs.push_back("x" + std::to_string(k));
    ys.push_back("y" + std::to_string(k));
  }
  spec.cond = BoolExpr::mk_and(ord_formula(ys), veq_formula(xs, ys));
  spec.pre = arr_formula(i, j, "x");
  spec.post =
      Formula::mk_sep(arr_formula(i, j, "y"), Formula::mk_state("r", {}));
  return spec;
}

}  // namespace permccs
