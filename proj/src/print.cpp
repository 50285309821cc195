#include "permccs/print.hpp"

#include <sstream>

#include "permccs/proof.hpp"

namespace permccs {

namespace {

void pr_expr(std::ostream& os, const ExprPtr& e, bool rhs_of_addsub) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      os << e->lit;
      return;
    case Expr::Kind::Var:
      os << e->var;
      return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
      bool parens = rhs_of_addsub;
      if (parens) os << '(';
      pr_expr(os, e->lhs, false);
      os << (e->kind == Expr::Kind::Add ? " + " : " - ");
      pr_expr(os, e->rhs, true);
      if (parens) os << ')';
      return;
    }
  }
}

void pr_bool(std::ostream& os, const BoolPtr& b, bool nested) {
  switch (b->kind) {
    case BoolExpr::Kind::Leq:
      pr_expr(os, b->e1, false);
      os << " <= ";
      pr_expr(os, b->e2, false);
      return;
    case BoolExpr::Kind::Not:
      os << "!(";
      pr_bool(os, b->b1, false);
      os << ')';
      return;
    case BoolExpr::Kind::And: {
      if (nested) os << '(';
      pr_bool(os, b->b1, b->b1->kind == BoolExpr::Kind::And ? false : false);
      os << " && ";
      // right operand parenthesized when it is an And, to keep the shape
      pr_bool(os, b->b2, b->b2->kind == BoolExpr::Kind::And);
      if (nested) os << ')';
      return;
    }
  }
}

void pr_args(std::ostream& os, const std::vector<ExprPtr>& args) {
  os << '(';
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) os << ',';
    pr_expr(os, args[i], false);
  }
  os << ')';
}

// prefix-level printing; wraps Par in parens
void pr_proc(std::ostream& os, const ProcPtr& p, bool at_par_level);

void pr_prefix_operand(std::ostream& os, const ProcPtr& p) {
  if (p->kind == Process::Kind::Par) {
    os << '(';
    pr_proc(os, p, true);
    os << ')';
  } else {
    pr_proc(os, p, false);
  }
}

void pr_proc(std::ostream& os, const ProcPtr& p, bool at_par_level) {
  switch (p->kind) {
    case Process::Kind::Nil:
      os << '0';
      return;
    case Process::Kind::Out:
      os << p->chan << '!';
      pr_args(os, p->args);
      return;
    case Process::Kind::In: {
      os << p->chan << "?(";
      for (size_t i = 0; i < p->params.size(); ++i) {
        if (i) os << ',';
        os << p->params[i];
      }
      os << ").";
      pr_prefix_operand(os, p->cont);
      return;
    }
    case Process::Kind::If: {
      os << "if ";
      pr_bool(os, p->guard, false);
      os << " then ";
      if (p->left->kind == Process::Kind::Par ||
          p->left->kind == Process::Kind::If) {
        os << '(';
        pr_proc(os, p->left, true);
        os << ')';
      } else {
        pr_proc(os, p->left, false);
      }
      os << " else ";
      pr_prefix_operand(os, p->right);
      return;
    }
    case Process::Kind::Call: {
      os << p->defname;
      pr_args(os, p->args);
      if (!p->renaming.empty()) {
        os << '[';
        for (size_t i = 0; i < p->renaming.size(); ++i) {
          if (i) os << ',';
          os << p->renaming[i].first << '/' << p->renaming[i].second;
        }
        os << ']';
      }
      return;
    }
    case Process::Kind::Par: {
      if (p->left->kind == Process::Kind::Par) {
        os << '(';
        pr_proc(os, p->left, true);
        os << ')';
      } else {
        pr_proc(os, p->left, false);
      }
      os << " | ";
      pr_proc(os, p->right, true);
      return;
    }
    case Process::Kind::New: {
      os << "new " << p->chan;
      ProcPtr body = p->cont;
      while (body->kind == Process::Kind::New) {
        os << ',' << body->chan;
        body = body->cont;
      }
      os << '.';
      pr_prefix_operand(os, body);
      return;
    }
  }
}

void pr_sys(std::ostream& os, const SysPtr& s) {
  switch (s->kind) {
    case System::Kind::Leaf: {
      os << '<';
      bool first = true;
      for (auto& p : s->perms.perms) {
        if (!first) os << ',';
        first = false;
        os << p.chan << (p.pol == Polarity::Out ? '!' : '?');
      }
      os << ">{ ";
      pr_proc(os, s->proc, true);
      os << " }";
      return;
    }
    case System::Kind::Par: {
      if (s->left->kind == System::Kind::Par) {
        os << '(';
        pr_sys(os, s->left);
        os << ')';
      } else {
        pr_sys(os, s->left);
      }
      os << " | ";
      pr_sys(os, s->right);
      return;
    }
    case System::Kind::New: {
      os << "new " << s->chan;
      SysPtr body = s->body;
      while (body->kind == System::Kind::New) {
        os << ',' << body->chan;
        body = body->body;
      }
      os << '.';
      if (body->kind == System::Kind::Par) {
        os << '(';
        pr_sys(os, body);
        os << ')';
      } else {
        pr_sys(os, body);
      }
      return;
    }
  }
}

void pr_formula(std::ostream& os, const FormulaPtr& f, bool nested) {
  switch (f->kind) {
    case Formula::Kind::Emp:
      os << "emp";
      return;
    case Formula::Kind::Any:
      os << "any";
      return;
    case Formula::Kind::State:
      os << f->chan << "|->";
      pr_args(os, f->args);
      return;
    case Formula::Kind::Blk:
      os << "blk " << f->chan;
      return;
    case Formula::Kind::Sep: {
      if (nested) os << '(';
      pr_formula(os, f->left, false);
      os << " * ";
      pr_formula(os, f->right, f->right->kind == Formula::Kind::Sep);
      if (nested) os << ')';
      return;
    }
  }
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::ostringstream os;
  pr_expr(os, e, false);
  return os.str();
}
std::string print(const BoolPtr& b) {
  std::ostringstream os;
  pr_bool(os, b, false);
  return os.str();
}
std::string print(const ProcPtr& p) {
  std::ostringstream os;
  pr_proc(os, p, true);
  return os.str();
}
std::string print(const SysPtr& s) {
  std::ostringstream os;
  pr_sys(os, s);
  return os.str();
}
std::string print(const Perm& p) {
  return p.chan + (p.pol == Polarity::Out ? "!" : "?");
}
std::string print(const PermSet& e) {
  std::string s = "{";
  bool first = true;
  for (auto& p : e.perms) {
    if (!first) s += ',';
    first = false;
    s += print(p);
  }
  return s + "}";
}
std::string print(const FormulaPtr& f) {
  std::ostringstream os;
  pr_formula(os, f, false);
  return os.str();
}
std::string print(const PermEnv& env) {
  std::ostringstream os;
  bool first = true;
  for (auto& [c, e] : env.map) {
    if (!first) os << "; ";
    first = false;
    os << c << " : " << print(e);
  }
  return os.str();
}
std::string print_defs(const DefTable& defs) {
  std::ostringstream os;
  for (auto& [name, d] : defs.defs) {
    os << "def " << name << '(';
    for (size_t i = 0; i < d.params.size(); ++i) {
      if (i) os << ',';
      os << d.params[i];
    }
    os << ") = " << print(d.body) << '\n';
  }
  return os.str();
}
std::string print(const Sequent& sq) {
  std::ostringstream os;
  os << "env " << print(sq.env) << " ; bool " << print(sq.cond) << " |- { "
     << print(sq.pre) << " } " << print(sq.sys) << " { " << print(sq.post)
     << " }";
  return os.str();
}

}  // namespace permccs
