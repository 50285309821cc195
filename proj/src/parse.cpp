#include "permccs/parse.hpp"

#include <algorithm>
#include <cctype>

namespace permccs {

namespace {

enum class Tok {
  Ident, Int, LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Bang, Question, Dot, Comma, Pipe, Slash, Star, Colon, Semi,
  Plus, Minus, Leq, Lt, Geq, Gt, Eq, AndAnd, OrOr, Implies, Not,
  Langle, Rangle, MapsTo, Turnstile, Str, End
};

struct Token {
  Tok kind;
  std::string text;
  Value num = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  std::vector<Token> toks;

  explicit Lexer(const std::string& s) : src(s) { run(); }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(line, col, msg);
  }

  char peek(size_t off = 0) const {
    return pos + off < src.size() ? src[pos + off] : '\0';
  }
  void advance() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }
  void push(Tok k, std::string t, int l, int c) {
    Token tok;
    tok.kind = k;
    tok.text = std::move(t);
    tok.line = l;
    tok.col = c;
    toks.push_back(std::move(tok));
  }

  void run() {
    while (pos < src.size()) {
      char c = peek();
      int l = line, co = col;
      if (c == '#') {
        while (pos < src.size() && peek() != '\n') advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string num;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          num += peek();
          advance();
        }
        Token t;
        t.kind = Tok::Int;
        t.text = num;
        t.num = std::stoll(num);
        t.line = l;
        t.col = co;
        toks.push_back(t);
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (std::isalnum(static_cast<unsigned char>(peek())) ||
               peek() == '_' || peek() == '\'') {
          id += peek();
          advance();
        }
        push(Tok::Ident, id, l, co);
        continue;
      }
      if (c == '"') {
        advance();
        std::string s;
        while (pos < src.size() && peek() != '"') {
          if (peek() == '\\' && pos + 1 < src.size()) {
            advance();
            char e = peek();
            if (e == 'n') s += '\n';
            else s += e;
            advance();
          } else {
            s += peek();
            advance();
          }
        }
        if (pos >= src.size()) fail("unterminated string");
        advance();
        push(Tok::Str, s, l, co);
        continue;
      }
      auto two = [&](char a, char b) {
        return c == a && peek(1) == b;
      };
      if (two('|', '-') && peek(2) == '>') {
        advance(); advance(); advance();
        push(Tok::MapsTo, "|->", l, co);
        continue;
      }
      if (two('|', '-')) {
        advance(); advance();
        push(Tok::Turnstile, "|-", l, co);
        continue;
      }
      if (two('|', '|')) { advance(); advance(); push(Tok::OrOr, "||", l, co); continue; }
      if (two('&', '&')) { advance(); advance(); push(Tok::AndAnd, "&&", l, co); continue; }
      if (two('<', '=')) { advance(); advance(); push(Tok::Leq, "<=", l, co); continue; }
      if (two('>', '=')) { advance(); advance(); push(Tok::Geq, ">=", l, co); continue; }
      if (two('=', '>')) { advance(); advance(); push(Tok::Implies, "=>", l, co); continue; }
      switch (c) {
        case '(': advance(); push(Tok::LParen, "(", l, co); continue;
        case ')': advance(); push(Tok::RParen, ")", l, co); continue;
        case '{': advance(); push(Tok::LBrace, "{", l, co); continue;
        case '}': advance(); push(Tok::RBrace, "}", l, co); continue;
        case '[': advance(); push(Tok::LBracket, "[", l, co); continue;
        case ']': advance(); push(Tok::RBracket, "]", l, co); continue;
        case '!': advance(); push(Tok::Bang, "!", l, co); continue;
        case '?': advance(); push(Tok::Question, "?", l, co); continue;
        case '.': advance(); push(Tok::Dot, ".", l, co); continue;
        case ',': advance(); push(Tok::Comma, ",", l, co); continue;
        case '|': advance(); push(Tok::Pipe, "|", l, co); continue;
        case '/': advance(); push(Tok::Slash, "/", l, co); continue;
        case '*': advance(); push(Tok::Star, "*", l, co); continue;
        case ':': advance(); push(Tok::Colon, ":", l, co); continue;
        case ';': advance(); push(Tok::Semi, ";", l, co); continue;
        case '+': advance(); push(Tok::Plus, "+", l, co); continue;
        case '-': advance(); push(Tok::Minus, "-", l, co); continue;
        case '<': advance(); push(Tok::Lt, "<", l, co); continue;
        case '>': advance(); push(Tok::Gt, ">", l, co); continue;
        case '=': advance(); push(Tok::Eq, "=", l, co); continue;
        default:
          fail(std::string("unexpected character '") + c + "'");
      }
    }
    push(Tok::End, "", line, col);
  }
};

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {
      "new", "if",  "then", "else", "def",  "env",
      "bool", "emp", "any",  "blk",  "true", "false"};
  return kw.count(s) != 0;
}

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;

  explicit Parser(const std::string& text) : toks(Lexer(text).toks) {}

  const Token& cur() const { return toks[pos]; }
  const Token& peek(size_t off = 1) const {
    return toks[std::min(pos + off, toks.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_kw(const std::string& kw) const {
    return cur().kind == Tok::Ident && cur().text == kw;
  }
  Token eat() { return toks[pos++]; }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(cur().line, cur().col, msg);
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail("expected " + what);
    return eat();
  }
  void expect_kw(const std::string& kw) {
    if (!at_kw(kw)) fail("expected '" + kw + "'");
    eat();
  }
  Name ident(const std::string& what) {
    if (!at(Tok::Ident) || is_keyword(cur().text))
      fail("expected " + what);
    return eat().text;
  }

  // ---- expressions -------------------------------------------------------

  ExprPtr expr_atom() {
    if (at(Tok::Int)) return Expr::mk_lit(eat().num);
    if (at(Tok::Minus)) {
      eat();
      if (at(Tok::Int)) return Expr::mk_lit(-eat().num);
      return Expr::mk_sub(Expr::mk_lit(0), expr_atom());
    }
    if (at(Tok::LParen)) {
      eat();
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text))
      return Expr::mk_var(eat().text);
    fail("expected expression");
  }

  ExprPtr expr() {
    ExprPtr e = expr_atom();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      bool add = at(Tok::Plus);
      eat();
      ExprPtr r = expr_atom();
      e = add ? Expr::mk_add(e, r) : Expr::mk_sub(e, r);
    }
    return e;
  }

  std::vector<ExprPtr> expr_list_paren() {
    expect(Tok::LParen, "'('");
    std::vector<ExprPtr> es;
    if (!at(Tok::RParen)) {
      es.push_back(expr());
      while (at(Tok::Comma)) {
        eat();
        es.push_back(expr());
      }
    }
    expect(Tok::RParen, "')'");
    return es;
  }

  // ---- booleans ----------------------------------------------------------

  BoolPtr bool_cmp() {
    ExprPtr e1 = expr();
    if (at(Tok::Leq)) { eat(); return BoolExpr::mk_leq(e1, expr()); }
    if (at(Tok::Lt))  { eat(); return BoolExpr::mk_lt(e1, expr()); }
    if (at(Tok::Geq)) { eat(); ExprPtr e2 = expr(); return BoolExpr::mk_leq(e2, e1); }
    if (at(Tok::Gt))  { eat(); ExprPtr e2 = expr(); return BoolExpr::mk_lt(e2, e1); }
    if (at(Tok::Eq))  { eat(); return BoolExpr::mk_eq(e1, expr()); }
    fail("expected comparison operator");
  }

  BoolPtr bool_atom() {
    if (at_kw("true")) { eat(); return BoolExpr::mk_true(); }
    if (at_kw("false")) { eat(); return BoolExpr::mk_false(); }
    if (at(Tok::Not) || at(Tok::Bang)) {
      eat();
      return BoolExpr::mk_not(bool_atom());
    }
    if (at(Tok::LParen)) {
      // parenthesized boolean or a parenthesized expression followed by a
      // comparison; try the comparison reading first
      size_t save = pos;
      try {
        return bool_cmp();
      } catch (const ParseError&) {
        pos = save;
      }
      eat();  // '('
      BoolPtr b = bool_expr();
      expect(Tok::RParen, "')'");
      return b;
    }
    return bool_cmp();
  }

  BoolPtr bool_and() {
    BoolPtr b = bool_atom();
    while (at(Tok::AndAnd)) {
      eat();
      b = BoolExpr::mk_and(b, bool_atom());
    }
    return b;
  }

  BoolPtr bool_expr() {
    BoolPtr b = bool_and();
    if (at(Tok::OrOr)) {
      eat();
      return BoolExpr::mk_or(b, bool_expr());
    }
    if (at(Tok::Implies)) {
      eat();
      return BoolExpr::mk_implies(b, bool_expr());
    }
    return b;
  }

  // ---- processes ---------------------------------------------------------

  std::vector<Name> name_list_paren() {
    expect(Tok::LParen, "'('");
    std::vector<Name> xs;
    if (!at(Tok::RParen)) {
      xs.push_back(ident("name"));
      while (at(Tok::Comma)) {
        eat();
        xs.push_back(ident("name"));
      }
    }
    expect(Tok::RParen, "')'");
    return xs;
  }

  ProcPtr proc_prefix() {
    if (at(Tok::Int) && cur().num == 0) {
      eat();
      return Process::mk_nil();
    }
    if (at(Tok::LParen)) {
      eat();
      ProcPtr p = proc();
      expect(Tok::RParen, "')'");
      return p;
    }
    if (at_kw("new")) {
      eat();
      std::vector<Name> cs;
      cs.push_back(ident("channel"));
      while (at(Tok::Comma)) {
        eat();
        cs.push_back(ident("channel"));
      }
      expect(Tok::Dot, "'.'");
      return Process::mk_new(cs, proc_prefix());
    }
    if (at_kw("if")) {
      eat();
      BoolPtr g = bool_expr();
      expect_kw("then");
      ProcPtr t = proc_prefix();
      expect_kw("else");
      ProcPtr e = proc_prefix();
      return Process::mk_if(g, t, e);
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      Name n = eat().text;
      if (at(Tok::Bang)) {
        eat();
        std::vector<ExprPtr> args;
        if (at(Tok::LParen)) args = expr_list_paren();
        return Process::mk_out(n, std::move(args));
      }
      if (at(Tok::Question)) {
        eat();
        std::vector<Name> xs;
        if (at(Tok::LParen)) xs = name_list_paren();
        expect(Tok::Dot, "'.' after input prefix");
        return Process::mk_in(n, std::move(xs), proc_prefix());
      }
      // a call: Name(args)[a/f,...], both suffixes optional
      std::vector<ExprPtr> args;
      if (at(Tok::LParen)) args = expr_list_paren();
      std::vector<std::pair<Name, Name>> ren;
      if (at(Tok::LBracket)) {
        eat();
        while (!at(Tok::RBracket)) {
          Name actual = ident("channel");
          expect(Tok::Slash, "'/'");
          Name formal = ident("channel");
          ren.emplace_back(actual, formal);
          if (at(Tok::Comma)) eat();
        }
        eat();
      }
      return Process::mk_call(n, std::move(args), std::move(ren));
    }
    fail("expected process");
  }

  ProcPtr proc() {
    ProcPtr p = proc_prefix();
    if (at(Tok::Pipe)) {
      eat();
      return Process::mk_par(p, proc());
    }
    return p;
  }

  // ---- permissions & systems ---------------------------------------------

  Perm perm() {
    Name c = ident("channel");
    if (at(Tok::Bang)) {
      eat();
      return perm_out(c);
    }
    if (at(Tok::Question)) {
      eat();
      return perm_in(c);
    }
    fail("expected '!' or '?' after permission channel");
  }

  PermSet perm_list(Tok end) {
    PermSet e;
    while (!at(end)) {
      Perm p = perm();
      if (e.contains(p))
        fail("duplicate permission " + p.chan +
             (p.pol == Polarity::Out ? "!" : "?"));
      e.insert(p);
      if (at(Tok::Comma)) eat();
    }
    return e;
  }

  SysPtr sys_atom() {
    if (at(Tok::LParen)) {
      eat();
      SysPtr s = sys();
      expect(Tok::RParen, "')'");
      return s;
    }
    if (at_kw("new")) {
      eat();
      std::vector<Name> cs;
      cs.push_back(ident("channel"));
      while (at(Tok::Comma)) {
        eat();
        cs.push_back(ident("channel"));
      }
      expect(Tok::Dot, "'.'");
      return System::mk_new(cs, sys_atom());
    }
    if (at(Tok::Lt) || at(Tok::Langle)) {
      eat();
      PermSet e = perm_list(Tok::Gt);
      expect(Tok::Gt, "'>'");
      expect(Tok::LBrace, "'{'");
      ProcPtr p = proc();
      expect(Tok::RBrace, "'}'");
      return System::mk_leaf(std::move(e), p);
    }
    fail("expected system");
  }

  SysPtr sys() {
    SysPtr s = sys_atom();
    if (at(Tok::Pipe)) {
      eat();
      return System::mk_par(s, sys());
    }
    return s;
  }

  // ---- formulas ------------------------------------------------------------

  FormulaPtr formula_atom() {
    if (at_kw("emp")) { eat(); return Formula::mk_emp(); }
    if (at_kw("any")) { eat(); return Formula::mk_any(); }
    if (at_kw("blk")) {
      eat();
      return Formula::mk_blk(ident("channel"));
    }
    if (at(Tok::LParen)) {
      eat();
      FormulaPtr f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    Name c = ident("channel");
    expect(Tok::MapsTo, "'|->'");
    return Formula::mk_state(c, expr_list_paren());
  }

  FormulaPtr formula() {
    FormulaPtr f = formula_atom();
    while (at(Tok::Star)) {
      eat();
      f = Formula::mk_sep(f, formula_atom());
    }
    return f;
  }

  // ---- environments ----------------------------------------------------------

  PermEnv env_entries(bool stop_at_bool) {
    std::map<Name, PermSet> m;
    while (true) {
      while (at(Tok::Semi)) eat();
      if (at(Tok::End)) break;
      if (stop_at_bool && at_kw("bool")) break;
      Name c = ident("channel");
      expect(Tok::Colon, "':'");
      expect(Tok::LBrace, "'{'");
      PermSet e = perm_list(Tok::RBrace);
      expect(Tok::RBrace, "'}'");
      if (m.count(c)) fail("duplicate environment entry for " + c);
      m[c] = std::move(e);
    }
    try {
      return PermEnv(std::move(m));
    } catch (const EnvInvariantError& e) {
      fail(e.what());
    }
  }

  // ---- definitions & files ---------------------------------------------------

  DefTable defs() {
    DefTable t;
    while (at_kw("def")) {
      eat();
      Name n = ident("definition name");
      std::vector<Name> params = name_list_paren();
      expect(Tok::Eq, "'='");
      ProcPtr body = proc();
      if (t.has(n)) fail("duplicate definition " + n);
      t.add(n, std::move(params), body);
    }
    return t;
  }

  Sequent sequent(const DefTable& dt) {
    expect_kw("env");
    PermEnv env = env_entries(/*stop_at_bool=*/true);
    expect_kw("bool");
    BoolPtr b = bool_expr();
    expect(Tok::Turnstile, "'|-'");
    expect(Tok::LBrace, "'{'");
    FormulaPtr pre = formula();
    expect(Tok::RBrace, "'}'");
    SysPtr s = sys();
    expect(Tok::LBrace, "'{'");
    FormulaPtr post = formula();
    expect(Tok::RBrace, "'}'");
    validate_calls(erase(s), dt);
    return Sequent{std::move(env), b, pre, s, post};
  }

  void validate_calls(const ProcPtr& p, const DefTable& dt) {
    switch (p->kind) {
      case Process::Kind::Call: {
        if (!dt.has(p->defname))
          fail("unknown definition " + p->defname);
        if (dt.at(p->defname).params.size() != p->args.size())
          fail("arity mismatch in call to " + p->defname);
        return;
      }
      case Process::Kind::In:
      case Process::Kind::New:
        validate_calls(p->cont, dt);
        return;
      case Process::Kind::If:
      case Process::Kind::Par:
        validate_calls(p->left, dt);
        validate_calls(p->right, dt);
        return;
      default:
        return;
    }
  }

  void validate_def_bodies(const DefTable& dt) {
    for (auto& [n, d] : dt.defs) {
      validate_calls(d.body, dt);
      auto fv = free_vars(d.body);
      for (auto& p : d.params) fv.erase(p);
      if (!fv.empty())
        fail("definition " + n + " has unbound variable " + *fv.begin());
    }
  }
};

}  // namespace

ProcFile parse_process(const std::string& text) {
  Parser p(text);
  ProcFile f;
  f.defs = p.defs();
  p.validate_def_bodies(f.defs);
  f.main = p.at(Tok::End) ? Process::mk_nil() : p.proc();
  p.expect(Tok::End, "end of input");
  p.validate_calls(f.main, f.defs);
  return f;
}

SysFile parse_system(const std::string& text) {
  Parser p(text);
  SysFile f;
  f.defs = p.defs();
  p.validate_def_bodies(f.defs);
  f.main = p.sys();
  p.expect(Tok::End, "end of input");
  p.validate_calls(erase(f.main), f.defs);
  return f;
}

FormulaPtr parse_formula(const std::string& text) {
  Parser p(text);
  FormulaPtr f = p.formula();
  p.expect(Tok::End, "end of input");
  return f;
}

PermEnv parse_env(const std::string& text) {
  Parser p(text);
  return p.env_entries(false);
}

ExprPtr parse_expr(const std::string& text) {
  Parser p(text);
  ExprPtr e = p.expr();
  p.expect(Tok::End, "end of input");
  return e;
}

BoolPtr parse_bool(const std::string& text) {
  Parser p(text);
  BoolPtr b = p.bool_expr();
  p.expect(Tok::End, "end of input");
  return b;
}

PermSet parse_perm_set(const std::string& text) {
  Parser p(text);
  if (p.at(Tok::LBrace)) {
    p.eat();
    PermSet e = p.perm_list(Tok::RBrace);
    p.expect(Tok::RBrace, "'}'");
    return e;
  }
  return p.perm_list(Tok::End);
}

Sequent parse_sequent(const std::string& text, const DefTable& defs) {
  Parser p(text);
  Sequent sq = p.sequent(defs);
  p.expect(Tok::End, "end of input");
  return sq;
}

ProcPtr parse_process_term(const std::string& text, const DefTable& defs) {
  Parser p(text);
  ProcPtr r = p.proc();
  p.expect(Tok::End, "end of input");
  p.validate_calls(r, defs);
  return r;
}

SysPtr parse_system_term(const std::string& text, const DefTable& defs) {
  Parser p(text);
  SysPtr r = p.sys();
  p.expect(Tok::End, "end of input");
  p.validate_calls(erase(r), defs);
  return r;
}

// ---------------------------------------------------------------------------
// proof scripts (s-expressions with embedded sub-language strings)

namespace {

struct Sexp {
  enum class Kind { Sym, Int, Str, List } kind;
  std::string text;
  long long num = 0;
  std::vector<Sexp> items;
};

struct SexpParser {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit SexpParser(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(line, col, msg);
  }
  char peek() const { return pos < src.size() ? src[pos] : '\0'; }
  void advance() {
    if (src[pos] == '\n') { ++line; col = 1; } else { ++col; }
    ++pos;
  }
  void skip_ws() {
    while (pos < src.size()) {
      if (peek() == '#') {
        while (pos < src.size() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else {
        break;
      }
    }
  }

  Sexp parse() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of proof script");
    char c = peek();
    if (c == '(') {
      advance();
      Sexp s;
      s.kind = Sexp::Kind::List;
      while (true) {
        skip_ws();
        if (peek() == ')') {
          advance();
          return s;
        }
        if (pos >= src.size()) fail("missing ')'");
        s.items.push_back(parse());
      }
    }
    if (c == '"') {
      advance();
      Sexp s;
      s.kind = Sexp::Kind::Str;
      while (pos < src.size() && peek() != '"') {
        if (peek() == '\\') {
          advance();
          char e = peek();
          s.text += (e == 'n' ? '\n' : e);
          advance();
        } else {
          s.text += peek();
          advance();
        }
      }
      if (pos >= src.size()) fail("unterminated string");
      advance();
      return s;
    }
    std::string atom;
    while (pos < src.size() && !std::isspace(static_cast<unsigned char>(peek())) &&
           peek() != '(' && peek() != ')' && peek() != '"') {
      atom += peek();
      advance();
    }
    if (atom.empty()) fail("bad token");
    Sexp s;
    bool num = !atom.empty() &&
               (std::isdigit(static_cast<unsigned char>(atom[0])) ||
                (atom[0] == '-' && atom.size() > 1));
    if (num) {
      try {
        s.num = std::stoll(atom);
        s.kind = Sexp::Kind::Int;
        return s;
      } catch (...) {
      }
    }
    s.kind = Sexp::Kind::Sym;
    s.text = atom;
    return s;
  }
};

std::vector<int> int_list(const Sexp& s) {
  std::vector<int> out;
  if (s.kind == Sexp::Kind::Int) {
    out.push_back(static_cast<int>(s.num));
    return out;
  }
  if (s.kind != Sexp::Kind::List) throw std::runtime_error("expected list");
  for (auto& it : s.items) out.push_back(static_cast<int>(it.num));
  return out;
}

std::vector<Name> name_list(const Sexp& s) {
  std::vector<Name> out;
  if (s.kind == Sexp::Kind::Sym) {
    out.push_back(s.text);
    return out;
  }
  if (s.kind != Sexp::Kind::List) throw std::runtime_error("expected list");
  for (auto& it : s.items) out.push_back(it.text);
  return out;
}

std::vector<ExprPtr> expr_list_str(const std::string& s) {
  // comma-separated expressions, possibly empty
  std::vector<ExprPtr> out;
  Parser p(s);
  if (p.at(Tok::End)) return out;
  out.push_back(p.expr());
  while (p.at(Tok::Comma)) {
    p.eat();
    out.push_back(p.expr());
  }
  p.expect(Tok::End, "end of expression list");
  return out;
}

ProofNode parse_node(const Sexp& s, const DefTable& defs) {
  if (s.kind != Sexp::Kind::List || s.items.empty() ||
      s.items[0].kind != Sexp::Kind::Sym)
    throw std::runtime_error("proof node must be (ruleName ...)");
  ProofNode n;
  auto r = rule_from_name(s.items[0].text);
  if (!r) throw std::runtime_error("unknown rule " + s.items[0].text);
  n.rule = *r;
  size_t i = 1;
  while (i < s.items.size()) {
    const Sexp& it = s.items[i];
    if (it.kind == Sexp::Kind::Sym && !it.text.empty() && it.text[0] == ':') {
      if (i + 1 >= s.items.size())
        throw std::runtime_error("missing value for " + it.text);
      const Sexp& v = s.items[i + 1];
      const std::string key = it.text;
      auto str = [&]() -> const std::string& {
        if (v.kind != Sexp::Kind::Str && v.kind != Sexp::Kind::Sym)
          throw std::runtime_error(key + " expects a string");
        return v.text;
      };
      if (key == ":chan") n.inst.chan = str();
      else if (key == ":args") n.inst.args = expr_list_str(str());
      else if (key == ":leaf") n.inst.leaf = static_cast<int>(v.num);
      else if (key == ":left") n.inst.left_leaves = int_list(v);
      else if (key == ":left-atoms") n.inst.left_atoms = int_list(v);
      else if (key == ":left-perms") n.inst.left_perms = parse_perm_set(str());
      else if (key == ":pre1") n.inst.pre1 = parse_formula(str());
      else if (key == ":pre2") n.inst.pre2 = parse_formula(str());
      else if (key == ":post1") n.inst.post1 = parse_formula(str());
      else if (key == ":post2") n.inst.post2 = parse_formula(str());
      else if (key == ":cut" || key == ":mid") n.inst.cut = parse_formula(str());
      else if (key == ":frame") n.inst.frame = parse_formula(str());
      else if (key == ":pre") n.inst.pre = parse_formula(str());
      else if (key == ":post") n.inst.post = parse_formula(str());
      else if (key == ":chans") n.inst.chans = name_list(v);
      else if (key == ":env") n.inst.env = parse_env(str());
      else if (key == ":var") n.inst.var = str();
      else if (key == ":expr") n.inst.expr = parse_expr(str());
      else if (key == ":from") n.inst.from = str();
      else if (key == ":to") n.inst.to = str();
      else if (key == ":sequent")
        n.inst.sequent = std::make_shared<Sequent>(parse_sequent(str(), defs));
      else
        throw std::runtime_error("unknown key " + key);
      i += 2;
    } else if (it.kind == Sexp::Kind::List) {
      n.children.push_back(parse_node(it, defs));
      ++i;
    } else {
      throw std::runtime_error("unexpected item in proof node");
    }
  }
  return n;
}

}  // namespace

ProofScript parse_proof(const std::string& text) {
  SexpParser sp(text);
  Sexp top = sp.parse();
  if (top.kind != Sexp::Kind::List || top.items.empty() ||
      top.items[0].kind != Sexp::Kind::Sym || top.items[0].text != "proof")
    throw ParseError(1, 1, "proof script must start with (proof ...)");

  ProofScript script;
  std::optional<std::string> sequent_text;
  const Sexp* body = nullptr;
  size_t i = 1;
  while (i < top.items.size()) {
    const Sexp& it = top.items[i];
    if (it.kind == Sexp::Kind::Sym && it.text == ":defs") {
      script.defs = parse_process(top.items.at(i + 1).text).defs;
      i += 2;
    } else if (it.kind == Sexp::Kind::Sym && it.text == ":sequent") {
      sequent_text = top.items.at(i + 1).text;
      i += 2;
    } else if (it.kind == Sexp::Kind::List) {
      if (body) throw ParseError(1, 1, "proof script has two root nodes");
      body = &it;
      ++i;
    } else {
      throw ParseError(1, 1, "unexpected item in (proof ...)");
    }
  }
  if (!sequent_text) throw ParseError(1, 1, "proof script lacks :sequent");
  if (!body) throw ParseError(1, 1, "proof script lacks a derivation");
  script.root = parse_sequent(*sequent_text, script.defs);
  try {
    script.tree = parse_node(*body, script.defs);
  } catch (const std::runtime_error& e) {
    throw ParseError(1, 1, e.what());
  }
  return script;
}

}  // namespace permccs
