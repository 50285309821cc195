#pragma once

// Pretty-printers for every object kind. The output parses back to an
// alpha-equal object (round-trip property).

#include <string>

#include "permccs/ast.hpp"
#include "permccs/logic.hpp"
#include "permccs/system.hpp"

namespace permccs {

std::string print(const ExprPtr& e);
std::string print(const BoolPtr& b);
std::string print(const ProcPtr& p);
std::string print(const SysPtr& s);
std::string print(const PermSet& e);
std::string print(const Perm& p);
std::string print(const FormulaPtr& f);
std::string print(const PermEnv& env);
std::string print_defs(const DefTable& defs);

struct Sequent;
std::string print(const Sequent& sq);

}  // namespace permccs
