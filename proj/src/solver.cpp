#include "specpl/solver.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace specpl {

namespace {

enum class Flow { Continue, Stop };
using Cont = std::function<Flow()>;

struct Env {
  const Program& prog;
  const SolveOptions& opt;
  CostCounters counters;
  std::unordered_map<std::string, TermPtr> bind;
  std::vector<std::string> trail;
  // Live choice points, as unique tokens in creation order.
  std::vector<uint64_t> cp_stack;
  uint64_t next_token = 1;
  long long fresh = 0;
  bool budget_exhausted = false;
  bool first_answer_seen = false;
};

// Every activation knows the choice-point stack height at its call; a cut
// truncates back to it.
struct ActState {
  size_t cut_barrier;
};

TermPtr walk(Env& e, TermPtr t) {
  while (t->kind == TermKind::Var) {
    auto it = e.bind.find(t->name);
    if (it == e.bind.end()) return t;
    t = it->second;
  }
  return t;
}

bool occurs(Env& e, const std::string& v, const TermPtr& t0) {
  TermPtr t = walk(e, t0);
  if (t->kind == TermKind::Var) return t->name == v;
  for (auto& a : t->args)
    if (occurs(e, v, a)) return true;
  return false;
}

void bind_var(Env& e, const std::string& v, const TermPtr& t) {
  e.bind.emplace(v, t);
  e.trail.push_back(v);
}

void undo_to(Env& e, size_t mark) {
  while (e.trail.size() > mark) {
    e.bind.erase(e.trail.back());
    e.trail.pop_back();
  }
}

bool unify(Env& e, TermPtr a, TermPtr b) {
  a = walk(e, a);
  b = walk(e, b);
  if (a->kind == TermKind::Var && b->kind == TermKind::Var && a->name == b->name) return true;
  if (a->kind == TermKind::Var || b->kind == TermKind::Var) {
    if (b->kind == TermKind::Var) std::swap(a, b);
    if (occurs(e, a->name, b)) {
      if (!e.opt.occur_check)
        throw SolveError("cyclic term: " + a->name + " occurs in its own binding");
      return false;
    }
    bind_var(e, a->name, b);
    return true;
  }
  if (a->kind != b->kind) return false;
  if (a->kind == TermKind::Int) return a->value == b->value;
  if (a->kind == TermKind::Atom) return a->name == b->name;
  if (a->name != b->name || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!unify(e, a->args[i], b->args[i])) return false;
  return true;
}

TermPtr resolve(Env& e, const TermPtr& t0) {
  TermPtr t = walk(e, t0);
  if (t->kind != TermKind::Compound) return t;
  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  for (auto& a : t->args) args.push_back(resolve(e, a));
  return mk_compound(t->name, std::move(args));
}

long long eval_arith(Env& e, const TermPtr& t0) {
  TermPtr t = walk(e, t0);
  switch (t->kind) {
    case TermKind::Int: return t->value;
    case TermKind::Var: throw SolveError("unbound variable in arithmetic");
    case TermKind::Atom: throw SolveError("atom '" + t->name + "' in arithmetic");
    case TermKind::Compound: break;
  }
  if (t->args.size() != 2)
    throw SolveError("unknown arithmetic functor " + t->name + "/" +
                     std::to_string(t->args.size()));
  long long a = eval_arith(e, t->args[0]);
  long long b = eval_arith(e, t->args[1]);
  if (t->name == "+") return a + b;
  if (t->name == "-") return a - b;
  if (t->name == "*") return a * b;
  if (t->name == "//") {
    if (b == 0) throw SolveError("division by zero");
    return a / b;
  }
  if (t->name == "mod") {
    if (b == 0) throw SolveError("division by zero");
    long long r = a % b; // result takes the divisor's sign
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
  }
  throw SolveError("unknown arithmetic functor " + t->name + "/2");
}

struct Machine {
  Env e;

  Machine(const Program& p, const SolveOptions& o) : e{p, o} {}

  std::string fresh_name() { return "#r" + std::to_string(e.fresh++); }

  void push_cp(uint64_t token) {
    e.cp_stack.push_back(token);
    ++e.counters.choicepoints_created;
    e.counters.max_live_choicepoints =
        std::max(e.counters.max_live_choicepoints, (long long)e.cp_stack.size());
  }

  bool cp_alive(size_t pos, uint64_t token) const {
    return e.cp_stack.size() > pos && e.cp_stack[pos] == token;
  }

  void pop_cp(size_t pos, uint64_t token) {
    if (cp_alive(pos, token)) e.cp_stack.resize(pos);
  }

  Flow exec_goal(const TermPtr& g, ActState& act, const Cont& k) {
    if (g->kind == TermKind::Var) throw SolveError("variable as goal");
    if (g->kind == TermKind::Int) throw SolveError("integer as goal");
    if (g->kind == TermKind::Atom) {
      if (g->name == "!") return exec_cut(act, k);
      return call_pred(g->name, {}, k);
    }
    const std::string& f = g->name;
    size_t n = g->args.size();
    if (f == "," && n == 2) {
      const TermPtr& l = g->args[0];
      const TermPtr& r = g->args[1];
      return exec_goal(l, act, [&]() { return exec_goal(r, act, k); });
    }
    if (f == ";" && n == 2) return exec_disjunction(g, act, k);
    if ((f == "not" || f == "\\+") && n == 1)
      return exec_negation_goal(g->args[0], k);
    if (f == "=" && n == 2) return exec_unify(g->args[0], g->args[1], k);
    if (is_builtin(f, (int)n)) return exec_builtin(f, g->args, k);
    return call_pred(f, g->args, k);
  }

  Flow exec_cut(ActState& act, const Cont& k) {
    if (e.cp_stack.size() > act.cut_barrier) e.cp_stack.resize(act.cut_barrier);
    return k();
  }

  Flow exec_unify(const TermPtr& a, const TermPtr& b, const Cont& k) {
    size_t mark = e.trail.size();
    if (unify(e, a, b)) {
      Flow f = k();
      undo_to(e, mark);
      return f;
    }
    undo_to(e, mark);
    return Flow::Continue;
  }

  Flow exec_disjunction(const TermPtr& g, ActState& act, const Cont& k) {
    std::vector<TermPtr> branches;
    TermPtr cur = g;
    while (cur->kind == TermKind::Compound && cur->name == ";" && cur->args.size() == 2) {
      branches.push_back(cur->args[0]);
      cur = cur->args[1];
    }
    branches.push_back(cur);
    uint64_t token = e.next_token++;
    size_t pos = e.cp_stack.size();
    push_cp(token);
    bool active = true;
    for (size_t i = 0; i < branches.size(); ++i) {
      if (active && i + 1 == branches.size()) {
        pop_cp(pos, token);
        active = false;
      }
      size_t mark = e.trail.size();
      Flow f = exec_goal(branches[i], act, k);
      undo_to(e, mark);
      if (f == Flow::Stop) {
        if (active) pop_cp(pos, token);
        return Flow::Stop;
      }
      if (active && !cp_alive(pos, token)) return Flow::Continue; // pruned by a cut
    }
    return Flow::Continue;
  }

  Flow exec_negation_goal(const TermPtr& inner, const Cont& k) {
    size_t mark = e.trail.size();
    size_t cp_mark = e.cp_stack.size();
    bool found = false;
    // The probe gets its own barrier: a cut inside the negated goal stays
    // local to it.
    ActState probe{cp_mark};
    Flow f = exec_goal(inner, probe, [&]() {
      found = true;
      return Flow::Stop;
    });
    undo_to(e, mark);
    if (e.cp_stack.size() > cp_mark) e.cp_stack.resize(cp_mark);
    if (f == Flow::Stop && !found) return Flow::Stop; // budget ran out inside
    if (found) return Flow::Continue;
    return k();
  }

  Flow exec_negation_literal(const Literal& inner, const Cont& k) {
    size_t mark = e.trail.size();
    size_t cp_mark = e.cp_stack.size();
    bool found = false;
    ActState probe{cp_mark};
    Flow f = exec_literal(inner, probe, [&]() {
      found = true;
      return Flow::Stop;
    });
    undo_to(e, mark);
    if (e.cp_stack.size() > cp_mark) e.cp_stack.resize(cp_mark);
    if (f == Flow::Stop && !found) return Flow::Stop;
    if (found) return Flow::Continue;
    return k();
  }

  Flow exec_builtin(const std::string& f, const std::vector<TermPtr>& args, const Cont& k) {
    if (f == "=") return exec_unify(args[0], args[1], k);
    if (f == "==" || f == "\\==") {
      bool eq = term_equal(resolve(e, args[0]), resolve(e, args[1]));
      if (eq == (f == "==")) return k();
      return Flow::Continue;
    }
    if (f == "is") {
      long long v = eval_arith(e, args[1]);
      return exec_unify(args[0], mk_int(v), k);
    }
    long long a = eval_arith(e, args[0]);
    long long b = eval_arith(e, args[1]);
    bool ok = f == "<"    ? a < b
              : f == "=<" ? a <= b
              : f == ">"  ? a > b
                          : a >= b;
    return ok ? k() : Flow::Continue;
  }

  Flow exec_literal(const Literal& l, ActState& act, const Cont& k) {
    switch (l.kind) {
      case LitKind::UnifyVarVar: return exec_unify(mk_var(l.x), mk_var(l.y), k);
      case LitKind::UnifyVarFunctor: {
        TermPtr rhs;
        if (l.fn.is_int) {
          rhs = mk_int(l.fn.value);
        } else if (l.fn.arity == 0) {
          rhs = mk_atom(l.fn.name);
        } else {
          std::vector<TermPtr> args;
          for (auto& v : l.vargs) args.push_back(mk_var(v));
          rhs = mk_compound(l.fn.name, std::move(args));
        }
        return exec_unify(mk_var(l.x), rhs, k);
      }
      case LitKind::Call: {
        std::vector<TermPtr> args;
        for (auto& v : l.vargs) args.push_back(mk_var(v));
        if (is_builtin(l.pred, (int)args.size())) return exec_builtin(l.pred, args, k);
        return call_pred(l.pred, args, k);
      }
      case LitKind::Cut: return exec_cut(act, k);
      case LitKind::Negation: return exec_negation_literal(*l.inner, k);
      case LitKind::General: return exec_goal(l.goal, act, k);
    }
    return Flow::Continue;
  }

  Flow exec_body(const std::vector<Literal>& body, size_t idx, ActState& act, const Cont& k) {
    if (idx == body.size()) return k();
    return exec_literal(body[idx], act,
                        [&]() { return exec_body(body, idx + 1, act, k); });
  }

  Flow call_pred(const std::string& name, const std::vector<TermPtr>& args, const Cont& k) {
    const Procedure* proc = e.prog.find(name, (int)args.size());
    if (!proc)
      throw SolveError("undefined predicate " + pred_key(name, (int)args.size()));

    std::vector<const Clause*> candidates;
    TermPtr first = args.empty() ? nullptr : walk(e, args[0]);
    for (auto& c : proc->clauses) {
      if (e.opt.model_indexing && first && first->kind != TermKind::Var &&
          !c.head_args.empty() && c.head_args[0]->kind != TermKind::Var &&
          !(principal_functor(c.head_args[0]) == principal_functor(first)))
        continue;
      candidates.push_back(&c);
    }
    if (candidates.empty()) return Flow::Continue;

    size_t barrier = e.cp_stack.size();
    uint64_t token = 0;
    size_t pos = barrier;
    bool active = candidates.size() > 1;
    if (active) {
      token = e.next_token++;
      push_cp(token);
    }
    ActState act{barrier};
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (active && i + 1 == candidates.size()) {
        pop_cp(pos, token);
        active = false;
      }
      const Clause& c = *candidates[i];
      size_t mark = e.trail.size();
      std::map<std::string, std::string> rn;
      for (auto& v : c.vars()) rn[v] = fresh_name();
      auto rnf = [&](const std::string& v) { return rn.at(v); };
      bool ok = true;
      for (size_t j = 0; j < args.size() && ok; ++j)
        ok = unify(e, args[j], rename_term_vars(c.head_args[j], rnf));
      if (!ok) {
        undo_to(e, mark);
        continue;
      }
      if (++e.counters.inferences > e.opt.budget) {
        e.budget_exhausted = true;
        undo_to(e, mark);
        if (active) pop_cp(pos, token);
        return Flow::Stop;
      }
      std::vector<Literal> body;
      body.reserve(c.body.size());
      for (auto& l : c.body) body.push_back(rename_literal_vars(l, rnf));
      Flow f = exec_body(body, 0, act, k);
      undo_to(e, mark);
      if (f == Flow::Stop) {
        if (active) pop_cp(pos, token);
        return Flow::Stop;
      }
      if (active && !cp_alive(pos, token)) return Flow::Continue; // pruned by a cut
    }
    return Flow::Continue;
  }
};

} // namespace

std::pair<AnswerSequence, CostCounters> solve(const Program& p, const TermPtr& goal,
                                              const SolveOptions& opt) {
  Machine m(p, opt);
  std::vector<std::string> qvars;
  term_vars(goal, qvars);
  AnswerSequence seq;
  ActState root{0};
  m.exec_goal(goal, root, [&]() {
    Substitution s;
    for (auto& v : qvars) s.bind[v] = resolve(m.e, mk_var(v));
    seq.answers.push_back(std::move(s));
    if (!m.e.first_answer_seen) {
      m.e.first_answer_seen = true;
      m.e.counters.residual_choicepoints_after_first_answer = (long long)m.e.cp_stack.size();
    }
    return Flow::Continue;
  });
  seq.terminator = m.e.budget_exhausted ? Terminator::BudgetExhausted : Terminator::Complete;
  return {std::move(seq), m.e.counters};
}

std::optional<Substitution> unify_terms(const TermPtr& a, const TermPtr& b, bool occur_check) {
  Program empty;
  SolveOptions opt;
  opt.occur_check = occur_check;
  Machine m(empty, opt);
  if (!unify(m.e, a, b)) return std::nullopt;
  Substitution s;
  std::vector<std::string> vs;
  term_vars(a, vs);
  term_vars(b, vs);
  for (auto& v : vs) {
    TermPtr r = resolve(m.e, mk_var(v));
    if (r->kind != TermKind::Var || r->name != v) s.bind[v] = r;
  }
  return s;
}

} // namespace specpl
