#pragma once

#include "specpl/term.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace specpl {

// Body literals. After normalization only the first five kinds occur and all
// argument variables within one literal are pairwise distinct; a freshly
// parsed program may still carry General goals (disjunctions, nested
// unifications, calls with structured arguments).
enum class LitKind { UnifyVarVar, UnifyVarFunctor, Call, Cut, Negation, General };

struct Literal;
using LiteralPtr = std::shared_ptr<const Literal>;

struct Literal {
  LitKind kind;
  std::string x, y;              // UnifyVarVar: x = y
  FunctorSym fn;                 // UnifyVarFunctor: x = fn(vargs...)
  std::string pred;              // Call predicate (user or builtin)
  std::vector<std::string> vargs;// UnifyVarFunctor / Call argument variables
  LiteralPtr inner;              // Negation body
  TermPtr goal;                  // General

  static Literal unify_vv(std::string a, std::string b);
  static Literal unify_vf(std::string v, FunctorSym f, std::vector<std::string> args);
  static Literal call(std::string p, std::vector<std::string> args);
  static Literal cut();
  static Literal negation(Literal l);
  static Literal general(TermPtr g);

  // All variable names, in order of first occurrence.
  std::vector<std::string> vars() const;
  bool operator==(const Literal& o) const;
};

struct Clause {
  std::string pred;
  std::vector<TermPtr> head_args; // arbitrary terms; plain X1..Xn when normalized
  std::vector<Literal> body;

  int arity() const { return (int)head_args.size(); }
  std::vector<std::string> vars() const; // first-occurrence order, head first
};

struct Procedure {
  std::string name;
  int arity = 0;
  std::vector<Clause> clauses;
  std::string key() const { return name + "/" + std::to_string(arity); }
};

// Procedures keep first-appearance order; clause order within a procedure is
// the textual order, which the semantics depends on.
struct Program {
  std::vector<Procedure> procs;

  const Procedure* find(const std::string& name, int arity) const;
  Procedure* find(const std::string& name, int arity);
  Procedure& obtain(const std::string& name, int arity);
};

// Builtins executed natively by the solver. `not/1` and `!/0` are literal
// kinds of their own; `=/2` between classified operands becomes a unification
// literal during normalization.
// Rewrites every variable name in the literal through `f`.
Literal rename_literal_vars(const Literal& l,
                            const std::function<std::string(const std::string&)>& f);

bool is_builtin(const std::string& name, int arity);
bool is_comparison_builtin(const std::string& name); // ==, \==, <, =<, >, >=
bool is_arith_comparison(const std::string& name);   // <, =<, >, >=

std::string pred_key(const std::string& name, int arity);

} // namespace specpl
