#pragma once

// The executable corpus: the filter/doubler program, the in-place parallel
// quicksort encoding with statically expanded channel indices, and the
// quicksort specification macros.

#include "permccs/logic.hpp"
#include "permccs/system.hpp"

namespace permccs {

// Prg = new c3.(Fltr() | Dbl()) with the filter/doubler bodies.
DefTable build_prg();

// Process-level closed term Prg() | c1!(v1) | c2!(v2).
ProcPtr prg_with_inputs(Value v1, Value v2);

// Quicksort over arrays of size n, channels a_1..a_n, result signal on r.
// Channel indices are static, so the table carries one specialization per
// live (i, j, p, c) tuple; the pivot index received at run time is
// dispatched by a chain of value comparisons.
DefTable build_quicksort(int n);

// <{a_i!}>{a_i!(v_i)} cells and <{a_1?..a_n?, r!}>{ Qck_1_n()[r] }.
SysPtr encode_array(const std::vector<Value>& values, const DefTable& defs);

// the names used by the encoding
Name qck_name(int i, int j);
Name array_chan(int i);

// Specification macros for quicksort: the ordering and the
// equal-up-to-reordering conditions over variable lists, and the array
// assertions. `xs`/`ys` name the input and output variable families.
BoolPtr ord_formula(const std::vector<Name>& ys);
BoolPtr veq_formula(const std::vector<Name>& xs, const std::vector<Name>& ys);
FormulaPtr arr_formula(int i, int j, const std::string& family);

// (ord && veq, arr-pre over xs, arr-post over ys) as used by the quicksort
// correctness sequent for indices i..j
struct QuicksortSpec {
  BoolPtr cond;
  FormulaPtr pre;
  FormulaPtr post;
};
QuicksortSpec gen_spec_formulas(int i, int j);

}  // namespace permccs
