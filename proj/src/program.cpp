#include "specpl/program.hpp"

#include <algorithm>
#include <set>

namespace specpl {

Literal Literal::unify_vv(std::string a, std::string b) {
  Literal l;
  l.kind = LitKind::UnifyVarVar;
  l.x = std::move(a);
  l.y = std::move(b);
  return l;
}

Literal Literal::unify_vf(std::string v, FunctorSym f, std::vector<std::string> args) {
  Literal l;
  l.kind = LitKind::UnifyVarFunctor;
  l.x = std::move(v);
  l.fn = std::move(f);
  l.vargs = std::move(args);
  return l;
}

Literal Literal::call(std::string p, std::vector<std::string> args) {
  Literal l;
  l.kind = LitKind::Call;
  l.pred = std::move(p);
  l.vargs = std::move(args);
  return l;
}

Literal Literal::cut() {
  Literal l;
  l.kind = LitKind::Cut;
  return l;
}

Literal Literal::negation(Literal inner) {
  Literal l;
  l.kind = LitKind::Negation;
  l.inner = std::make_shared<Literal>(std::move(inner));
  return l;
}

Literal Literal::general(TermPtr g) {
  Literal l;
  l.kind = LitKind::General;
  l.goal = std::move(g);
  return l;
}

std::vector<std::string> Literal::vars() const {
  std::vector<std::string> out;
  auto add = [&out](const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  switch (kind) {
    case LitKind::UnifyVarVar: add(x); add(y); break;
    case LitKind::UnifyVarFunctor:
      add(x);
      for (auto& a : vargs) add(a);
      break;
    case LitKind::Call:
      for (auto& a : vargs) add(a);
      break;
    case LitKind::Cut: break;
    case LitKind::Negation:
      for (auto& v : inner->vars()) add(v);
      break;
    case LitKind::General: term_vars(goal, out); break;
  }
  return out;
}

bool Literal::operator==(const Literal& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case LitKind::UnifyVarVar: return x == o.x && y == o.y;
    case LitKind::UnifyVarFunctor: return x == o.x && fn == o.fn && vargs == o.vargs;
    case LitKind::Call: return pred == o.pred && vargs == o.vargs;
    case LitKind::Cut: return true;
    case LitKind::Negation: return *inner == *o.inner;
    case LitKind::General: return term_equal(goal, o.goal);
  }
  return false;
}

std::vector<std::string> Clause::vars() const {
  std::vector<std::string> out;
  for (auto& a : head_args) term_vars(a, out);
  for (auto& l : body)
    for (auto& v : l.vars())
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

const Procedure* Program::find(const std::string& name, int arity) const {
  for (auto& p : procs)
    if (p.name == name && p.arity == arity) return &p;
  return nullptr;
}

Procedure* Program::find(const std::string& name, int arity) {
  for (auto& p : procs)
    if (p.name == name && p.arity == arity) return &p;
  return nullptr;
}

Procedure& Program::obtain(const std::string& name, int arity) {
  if (auto* p = find(name, arity)) return *p;
  procs.push_back(Procedure{name, arity, {}});
  return procs.back();
}

bool is_builtin(const std::string& name, int arity) {
  if (arity != 2) return false;
  static const std::set<std::string> b = {"=", "==", "\\==", "<", "=<", ">", ">=", "is"};
  return b.count(name) > 0;
}

bool is_comparison_builtin(const std::string& name) {
  static const std::set<std::string> b = {"==", "\\==", "<", "=<", ">", ">="};
  return b.count(name) > 0;
}

bool is_arith_comparison(const std::string& name) {
  static const std::set<std::string> b = {"<", "=<", ">", ">="};
  return b.count(name) > 0;
}

std::string pred_key(const std::string& name, int arity) {
  return name + "/" + std::to_string(arity);
}

} // namespace specpl

namespace specpl {

Literal rename_literal_vars(const Literal& l,
                            const std::function<std::string(const std::string&)>& f) {
  Literal out = l;
  switch (l.kind) {
    case LitKind::UnifyVarVar:
      out.x = f(l.x);
      out.y = f(l.y);
      break;
    case LitKind::UnifyVarFunctor:
      out.x = f(l.x);
      for (auto& v : out.vargs) v = f(v);
      break;
    case LitKind::Call:
      for (auto& v : out.vargs) v = f(v);
      break;
    case LitKind::Cut: break;
    case LitKind::Negation:
      out.inner = std::make_shared<Literal>(rename_literal_vars(*l.inner, f));
      break;
    case LitKind::General: out.goal = rename_term_vars(l.goal, f); break;
  }
  return out;
}

} // namespace specpl
