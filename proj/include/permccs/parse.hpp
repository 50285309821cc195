#pragma once

// Concrete text syntax for all five object kinds. `#` starts a line
// comment everywhere.

#include <string>
#include <utility>

#include "permccs/proof.hpp"

namespace permccs {

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line, col;
};

struct ProcFile {
  DefTable defs;
  ProcPtr main;
};

struct SysFile {
  DefTable defs;
  SysPtr main;
};

// definitions followed by a main term
ProcFile parse_process(const std::string& text);
SysFile parse_system(const std::string& text);

FormulaPtr parse_formula(const std::string& text);
PermEnv parse_env(const std::string& text);

ExprPtr parse_expr(const std::string& text);
BoolPtr parse_bool(const std::string& text);
PermSet parse_perm_set(const std::string& text);  // "c1!,c2?" or "{c1!}"

// needs the definition table for calls inside the system
Sequent parse_sequent(const std::string& text, const DefTable& defs);

ProofScript parse_proof(const std::string& text);

// standalone process/system terms against an existing table
ProcPtr parse_process_term(const std::string& text, const DefTable& defs);
SysPtr parse_system_term(const std::string& text, const DefTable& defs);

}  // namespace permccs
