#include "specpl/parser.hpp"

#include <cctype>
#include <cstring>
#include <map>
#include <set>

namespace specpl {

namespace {

enum class Tok { Atom, Var, Int, Punct, End, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  long long value = 0;
  int line = 1, col = 1;
  bool glued_paren = false; // '(' follows with no intervening layout
};

bool is_symbol_char(char c) {
  return std::strchr("+-*/\\^<>=~:.?@#&$", c) != nullptr;
}

class Lexer {
public:
  explicit Lexer(const std::string& s) : src(s) { advance(); }

  const Token& peek() const { return tok; }
  Token take() {
    Token t = tok;
    advance();
    return t;
  }

private:
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  Token tok;

  [[noreturn]] void fail(const std::string& m) { throw ParseError(m, line, col); }

  char cur() const { return pos < src.size() ? src[pos] : '\0'; }
  char la(size_t k) const { return pos + k < src.size() ? src[pos + k] : '\0'; }

  void bump() {
    if (cur() == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_layout() {
    while (pos < src.size()) {
      char c = cur();
      if (std::isspace((unsigned char)c)) {
        bump();
      } else if (c == '%') {
        while (pos < src.size() && cur() != '\n') bump();
      } else if (c == '/' && la(1) == '*') {
        bump(); bump();
        while (pos < src.size() && !(cur() == '*' && la(1) == '/')) bump();
        if (pos >= src.size()) fail("unterminated block comment");
        bump(); bump();
      } else {
        break;
      }
    }
  }

  void advance() {
    skip_layout();
    tok = Token{};
    tok.line = line;
    tok.col = col;
    if (pos >= src.size()) {
      tok.kind = Tok::Eof;
      return;
    }
    char c = cur();
    // Clause terminator: '.' followed by layout or end of input.
    if (c == '.' && (pos + 1 >= src.size() || std::isspace((unsigned char)la(1)) || la(1) == '%')) {
      bump();
      tok.kind = Tok::End;
      tok.text = ".";
      return;
    }
    if (std::isdigit((unsigned char)c)) {
      long long v = 0;
      while (std::isdigit((unsigned char)cur())) {
        v = v * 10 + (cur() - '0');
        bump();
      }
      tok.kind = Tok::Int;
      tok.value = v;
      return;
    }
    if (std::isupper((unsigned char)c) || c == '_') {
      std::string s;
      while (std::isalnum((unsigned char)cur()) || cur() == '_') {
        s += cur();
        bump();
      }
      tok.kind = Tok::Var;
      tok.text = s;
      tok.glued_paren = cur() == '(';
      return;
    }
    if (std::islower((unsigned char)c)) {
      std::string s;
      while (std::isalnum((unsigned char)cur()) || cur() == '_') {
        s += cur();
        bump();
      }
      tok.kind = Tok::Atom;
      tok.text = s;
      tok.glued_paren = cur() == '(';
      return;
    }
    if (c == '\'') {
      bump();
      std::string s;
      while (true) {
        if (pos >= src.size()) fail("unterminated quoted atom");
        if (cur() == '\'') {
          if (la(1) == '\'') { s += '\''; bump(); bump(); continue; }
          bump();
          break;
        }
        if (cur() == '\\' && la(1) != '\0') { bump(); s += cur(); bump(); continue; }
        s += cur();
        bump();
      }
      tok.kind = Tok::Atom;
      tok.text = s;
      tok.glued_paren = cur() == '(';
      return;
    }
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == '|') {
      bump();
      tok.kind = Tok::Punct;
      tok.text = std::string(1, c);
      return;
    }
    if (c == '!' || c == ';') {
      bump();
      tok.kind = Tok::Atom;
      tok.text = std::string(1, c);
      tok.glued_paren = cur() == '(';
      return;
    }
    if (is_symbol_char(c)) {
      std::string s;
      while (is_symbol_char(cur())) {
        // A '.' ends the run when it terminates the clause.
        if (cur() == '.' &&
            (pos + 1 >= src.size() || std::isspace((unsigned char)la(1)) || la(1) == '%'))
          break;
        s += cur();
        bump();
      }
      tok.kind = Tok::Atom;
      tok.text = s;
      tok.glued_paren = cur() == '(';
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

struct OpInfo {
  int prec;
  enum { XFX, XFY, YFX } type;
};

const std::map<std::string, OpInfo>& infix_ops() {
  static const std::map<std::string, OpInfo> ops = {
      {":-", {1200, OpInfo::XFX}}, {";", {1100, OpInfo::XFY}},
      {"->", {1050, OpInfo::XFY}}, {",", {1000, OpInfo::XFY}},
      {"=", {700, OpInfo::XFX}},   {"==", {700, OpInfo::XFX}},
      {"\\==", {700, OpInfo::XFX}}, {"<", {700, OpInfo::XFX}},
      {"=<", {700, OpInfo::XFX}},  {">", {700, OpInfo::XFX}},
      {">=", {700, OpInfo::XFX}},  {"is", {700, OpInfo::XFX}},
      {"+", {500, OpInfo::YFX}},   {"-", {500, OpInfo::YFX}},
      {"*", {400, OpInfo::YFX}},   {"//", {400, OpInfo::YFX}},
      {"mod", {400, OpInfo::YFX}},
  };
  return ops;
}

class Parser {
public:
  explicit Parser(const std::string& s) : lx(s) {}

  Program parse_program() {
    Program prog;
    int fresh_anon = 0;
    while (lx.peek().kind != Tok::Eof) {
      anon_counter = &fresh_anon;
      TermPtr t = parse(1200);
      expect_end();
      add_clause(prog, t);
    }
    return prog;
  }

  TermPtr parse_single_term() {
    int fresh_anon = 0;
    anon_counter = &fresh_anon;
    TermPtr t = parse(1200);
    if (lx.peek().kind == Tok::End) lx.take();
    if (lx.peek().kind != Tok::Eof)
      throw ParseError("trailing input after term", lx.peek().line, lx.peek().col);
    return t;
  }

private:
  Lexer lx;
  int* anon_counter = nullptr;

  [[noreturn]] void fail(const std::string& m) {
    throw ParseError(m, lx.peek().line, lx.peek().col);
  }

  void expect_end() {
    if (lx.peek().kind != Tok::End) fail("expected '.' at end of clause");
    lx.take();
  }

  void expect_punct(const std::string& p) {
    if (lx.peek().kind != Tok::Punct || lx.peek().text != p) fail("expected '" + p + "'");
    lx.take();
  }

  TermPtr parse(int maxp) {
    TermPtr left = parse_primary(maxp);
    int leftp = 0;
    while (true) {
      const Token& t = lx.peek();
      std::string opname;
      if (t.kind == Tok::Atom) opname = t.text;
      else if (t.kind == Tok::Punct && t.text == ",") opname = ",";
      else break;
      auto it = infix_ops().find(opname);
      if (it == infix_ops().end()) break;
      const OpInfo& op = it->second;
      if (op.prec > maxp) break;
      int leftmax = op.type == OpInfo::YFX ? op.prec : op.prec - 1;
      if (leftp > leftmax) break;
      if (opname == "->")
        throw ParseError("if-then-else '->' is not supported", t.line, t.col);
      lx.take();
      int rightmax = op.type == OpInfo::XFY ? op.prec : op.prec - 1;
      TermPtr right = parse(rightmax);
      left = mk_compound(opname, {left, right});
      leftp = op.prec;
    }
    return left;
  }

  TermPtr parse_primary(int maxp) {
    Token t = lx.peek();
    switch (t.kind) {
      case Tok::Int:
        lx.take();
        return mk_int(t.value);
      case Tok::Var: {
        lx.take();
        if (t.text == "_")
          return mk_var("_G" + std::to_string((*anon_counter)++));
        return mk_var(t.text);
      }
      case Tok::Punct:
        if (t.text == "(") {
          lx.take();
          TermPtr inner = parse(1200);
          expect_punct(")");
          return inner;
        }
        if (t.text == "[") return parse_list();
        fail("unexpected '" + t.text + "'");
      case Tok::Atom: {
        lx.take();
        if (t.glued_paren && lx.peek().kind == Tok::Punct && lx.peek().text == "(") {
          lx.take();
          std::vector<TermPtr> args;
          args.push_back(parse(999));
          while (lx.peek().kind == Tok::Punct && lx.peek().text == ",") {
            lx.take();
            args.push_back(parse(999));
          }
          expect_punct(")");
          return mk_compound(t.text, std::move(args));
        }
        // Prefix operators.
        if (t.text == "\\+" && starts_term() && 900 <= maxp)
          return mk_compound("not", {parse(900)});
        if (t.text == "-" && lx.peek().kind == Tok::Int) {
          Token n = lx.take();
          return mk_int(-n.value);
        }
        return mk_atom(t.text);
      }
      case Tok::End:
      case Tok::Eof: fail("unexpected end of input");
    }
    fail("unexpected token");
  }

  bool starts_term() {
    const Token& t = lx.peek();
    if (t.kind == Tok::Int || t.kind == Tok::Var) return true;
    if (t.kind == Tok::Atom) return true;
    if (t.kind == Tok::Punct && (t.text == "(" || t.text == "[")) return true;
    return false;
  }

  TermPtr parse_list() {
    expect_punct("[");
    if (lx.peek().kind == Tok::Punct && lx.peek().text == "]") {
      lx.take();
      return mk_nil();
    }
    std::vector<TermPtr> items;
    items.push_back(parse(999));
    while (lx.peek().kind == Tok::Punct && lx.peek().text == ",") {
      lx.take();
      items.push_back(parse(999));
    }
    TermPtr tail = nullptr;
    if (lx.peek().kind == Tok::Punct && lx.peek().text == "|") {
      lx.take();
      tail = parse(999);
    }
    expect_punct("]");
    return mk_list(items, tail);
  }

  void add_clause(Program& prog, const TermPtr& t) {
    TermPtr head = t;
    std::vector<Literal> body;
    if (t->kind == TermKind::Compound && t->name == ":-" && t->args.size() == 2) {
      head = t->args[0];
      body = goal_term_to_literals(t->args[1]);
    }
    if (head->kind != TermKind::Atom && head->kind != TermKind::Compound)
      fail("clause head must be an atom or a compound term");
    if (head->kind == TermKind::Compound && (head->name == "." || head->name == ":-"))
      fail("clause head must be an atom or a compound term");
    Clause c;
    c.pred = head->name;
    if (head->kind == TermKind::Compound) c.head_args = head->args;
    if (is_builtin(c.pred, (int)c.head_args.size()))
      fail("cannot define builtin " + pred_key(c.pred, (int)c.head_args.size()));
    c.body = std::move(body);
    prog.obtain(c.pred, c.arity()).clauses.push_back(std::move(c));
  }
};

void flatten_conj(const TermPtr& t, std::vector<TermPtr>& out) {
  if (t->kind == TermKind::Compound && t->name == "," && t->args.size() == 2) {
    flatten_conj(t->args[0], out);
    flatten_conj(t->args[1], out);
    return;
  }
  out.push_back(t);
}

bool all_distinct_vars(const std::vector<TermPtr>& args) {
  std::set<std::string> seen;
  for (auto& a : args) {
    if (a->kind != TermKind::Var) return false;
    if (!seen.insert(a->name).second) return false;
  }
  return true;
}

std::vector<std::string> var_names(const std::vector<TermPtr>& args) {
  std::vector<std::string> out;
  for (auto& a : args) out.push_back(a->name);
  return out;
}

Literal classify_goal(const TermPtr& g) {
  if (g->kind == TermKind::Var)
    throw ParseError("a variable is not a callable goal", 0, 0);
  if (g->kind == TermKind::Int)
    throw ParseError("an integer is not a callable goal", 0, 0);
  if (g->kind == TermKind::Atom) {
    if (g->name == "!") return Literal::cut();
    return Literal::call(g->name, {});
  }
  const std::string& f = g->name;
  size_t n = g->args.size();
  if ((f == "not" || f == "\\+") && n == 1)
    return Literal::negation(classify_goal(g->args[0]));
  if (f == "=" && n == 2) {
    const TermPtr& a = g->args[0];
    const TermPtr& b = g->args[1];
    if (a->kind == TermKind::Var && b->kind == TermKind::Var && a->name != b->name)
      return Literal::unify_vv(a->name, b->name);
    auto flat = [&](const TermPtr& v, const TermPtr& s) -> std::optional<Literal> {
      if (v->kind != TermKind::Var) return std::nullopt;
      if (s->kind == TermKind::Var) return std::nullopt;
      if (s->kind == TermKind::Int)
        return Literal::unify_vf(v->name, FunctorSym::mk_int(s->value), {});
      if (s->kind == TermKind::Atom)
        return Literal::unify_vf(v->name, FunctorSym::mk(s->name, 0), {});
      if (!all_distinct_vars(s->args)) return std::nullopt;
      for (auto& a2 : s->args)
        if (a2->name == v->name) return std::nullopt;
      return Literal::unify_vf(v->name, FunctorSym::mk(s->name, (int)s->args.size()),
                               var_names(s->args));
    };
    if (auto l = flat(a, b)) return *l;
    if (auto l = flat(b, a)) return *l;
    return Literal::general(g);
  }
  if (f == ";" && n == 2) return Literal::general(g);
  if (all_distinct_vars(g->args)) return Literal::call(f, var_names(g->args));
  return Literal::general(g);
}

} // namespace

std::vector<Literal> goal_term_to_literals(const TermPtr& goal) {
  std::vector<TermPtr> goals;
  flatten_conj(goal, goals);
  std::vector<Literal> out;
  out.reserve(goals.size());
  for (auto& g : goals) out.push_back(classify_goal(g));
  return out;
}

Program parse_program(const std::string& text) { return Parser(text).parse_program(); }

TermPtr parse_term_string(const std::string& text) { return Parser(text).parse_single_term(); }

} // namespace specpl
