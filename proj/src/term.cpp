#include "specpl/term.hpp"

#include <algorithm>
#include <set>

namespace specpl {

TermPtr mk_var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Var;
  t->name = std::move(name);
  return t;
}

TermPtr mk_int(long long v) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Int;
  t->value = v;
  return t;
}

TermPtr mk_atom(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Atom;
  t->name = std::move(name);
  return t;
}

TermPtr mk_compound(std::string functor, std::vector<TermPtr> args) {
  if (args.empty()) return mk_atom(std::move(functor));
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Compound;
  t->name = std::move(functor);
  t->args = std::move(args);
  return t;
}

TermPtr mk_nil() { return mk_atom("[]"); }

TermPtr mk_cons(TermPtr head, TermPtr tail) {
  return mk_compound(".", {std::move(head), std::move(tail)});
}

TermPtr mk_list(const std::vector<TermPtr>& items, TermPtr tail) {
  TermPtr t = tail ? tail : mk_nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) t = mk_cons(*it, t);
  return t;
}

bool is_nil(const TermPtr& t) { return t->kind == TermKind::Atom && t->name == "[]"; }

bool is_cons(const TermPtr& t) {
  return t->kind == TermKind::Compound && t->name == "." && t->args.size() == 2;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var:
    case TermKind::Atom: return a->name == b->name;
    case TermKind::Int: return a->value == b->value;
    case TermKind::Compound:
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!term_equal(a->args[i], b->args[i])) return false;
      return true;
  }
  return false;
}

void term_vars(const TermPtr& t, std::vector<std::string>& out) {
  switch (t->kind) {
    case TermKind::Var:
      if (std::find(out.begin(), out.end(), t->name) == out.end()) out.push_back(t->name);
      break;
    case TermKind::Compound:
      for (auto& a : t->args) term_vars(a, out);
      break;
    default: break;
  }
}

bool term_is_ground(const TermPtr& t) {
  if (t->kind == TermKind::Var) return false;
  if (t->kind == TermKind::Compound)
    for (auto& a : t->args)
      if (!term_is_ground(a)) return false;
  return true;
}

namespace {
bool linear_walk(const TermPtr& t, std::set<std::string>& seen) {
  if (t->kind == TermKind::Var) return seen.insert(t->name).second;
  if (t->kind == TermKind::Compound)
    for (auto& a : t->args)
      if (!linear_walk(a, seen)) return false;
  return true;
}
} // namespace

bool term_is_linear(const TermPtr& t) {
  std::set<std::string> seen;
  return linear_walk(t, seen);
}

long long term_size(const TermPtr& t) {
  long long n = 1;
  if (t->kind == TermKind::Compound)
    for (auto& a : t->args) n += term_size(a);
  return n;
}

std::optional<long long> list_length(const TermPtr& t) {
  long long n = 0;
  const Term* cur = t.get();
  while (true) {
    if (cur->kind == TermKind::Atom && cur->name == "[]") return n;
    if (cur->kind == TermKind::Compound && cur->name == "." && cur->args.size() == 2) {
      ++n;
      cur = cur->args[1].get();
      continue;
    }
    return std::nullopt;
  }
}

std::string FunctorSym::str() const {
  if (is_int) return std::to_string(value) + "/0";
  return name + "/" + std::to_string(arity);
}

FunctorSym principal_functor(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Int: return FunctorSym::mk_int(t->value);
    case TermKind::Atom: return FunctorSym::mk(t->name, 0);
    case TermKind::Compound: return FunctorSym::mk(t->name, (int)t->args.size());
    case TermKind::Var: break;
  }
  return FunctorSym::mk("?var", 0);
}

} // namespace specpl

namespace specpl {

TermPtr rename_term_vars(const TermPtr& t,
                         const std::function<std::string(const std::string&)>& f) {
  switch (t->kind) {
    case TermKind::Var: {
      std::string nn = f(t->name);
      return nn == t->name ? t : mk_var(std::move(nn));
    }
    case TermKind::Int:
    case TermKind::Atom: return t;
    case TermKind::Compound: break;
  }
  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  bool changed = false;
  for (auto& a : t->args) {
    args.push_back(rename_term_vars(a, f));
    changed = changed || args.back() != a;
  }
  if (!changed) return t;
  return mk_compound(t->name, std::move(args));
}

} // namespace specpl
