#include "specpl/normal_form.hpp"

#include <map>
#include <set>

#include "specpl/parser.hpp"
#include "specpl/printer.hpp"

namespace specpl {

namespace {

// Provisional names used while a clause is being rewritten: "#<i>" for head
// positions, "#g<k>" for gensyms. Source programs cannot contain '#'.
struct ClauseCtx {
  std::map<std::string, std::string> varmap;
  int gensym = 0;

  std::string fresh() { return "#g" + std::to_string(gensym++); }
  std::string map(const std::string& v) const {
    auto it = varmap.find(v);
    return it == varmap.end() ? v : it->second;
  }
};

bool term_mentions_cut(const TermPtr& t) {
  if (t->kind == TermKind::Atom && t->name == "!") return true;
  for (auto& a : t->args)
    if (term_mentions_cut(a)) return true;
  return false;
}

bool literal_mentions_cut(const Literal& l) {
  switch (l.kind) {
    case LitKind::Cut: return true;
    case LitKind::Negation: return literal_mentions_cut(*l.inner);
    case LitKind::General: return term_mentions_cut(l.goal);
    default: return false;
  }
}

// Emits v = f(...) plus follow-up literals for nested structures, repeated
// variables, and occurrences of v itself. Every follow-up binds a variable
// that is fresh at its emission point, so it surely succeeds.
void emit_structure(const std::string& v, const TermPtr& t, std::vector<Literal>& out,
                    ClauseCtx& cx) {
  if (t->kind == TermKind::Int) {
    out.push_back(Literal::unify_vf(v, FunctorSym::mk_int(t->value), {}));
    return;
  }
  if (t->kind == TermKind::Atom) {
    out.push_back(Literal::unify_vf(v, FunctorSym::mk(t->name, 0), {}));
    return;
  }
  std::vector<std::string> argnames;
  std::vector<std::pair<std::string, TermPtr>> sub_structs;
  std::vector<std::pair<std::string, std::string>> sub_eqs;
  std::set<std::string> used{v};
  for (auto& a : t->args) {
    if (a->kind == TermKind::Var) {
      std::string n = cx.map(a->name);
      if (used.insert(n).second) {
        argnames.push_back(n);
      } else {
        std::string c = cx.fresh();
        argnames.push_back(c);
        sub_eqs.emplace_back(c, n);
      }
    } else {
      std::string c = cx.fresh();
      argnames.push_back(c);
      sub_structs.emplace_back(c, a);
    }
  }
  out.push_back(
      Literal::unify_vf(v, FunctorSym::mk(t->name, (int)t->args.size()), argnames));
  for (auto& [c, n] : sub_eqs) out.push_back(Literal::unify_vv(c, n));
  for (auto& [c, s] : sub_structs) emit_structure(c, s, out, cx);
}

// Splits a source equality a=b into helper literals (all surely succeeding)
// and one core literal carrying the possible failure. Callers emit the core
// first in a plain body and keep it inside the negation when hoisting.
Literal flatten_equality(TermPtr a, TermPtr b, std::vector<Literal>& helpers, ClauseCtx& cx) {
  if (b->kind == TermKind::Var && a->kind != TermKind::Var) std::swap(a, b);
  if (a->kind == TermKind::Var) {
    std::string av = cx.map(a->name);
    if (b->kind == TermKind::Var) {
      std::string bv = cx.map(b->name);
      if (av == bv) return Literal::unify_vv(av, bv); // caller drops trivial X=X
      return Literal::unify_vv(av, bv);
    }
    std::vector<Literal> emitted;
    emit_structure(av, b, emitted, cx);
    Literal core = emitted.front();
    helpers.insert(helpers.end(), emitted.begin() + 1, emitted.end());
    return core;
  }
  // Both sides are structures: bind each to a fresh variable, compare those.
  std::string va = cx.fresh(), vb = cx.fresh();
  emit_structure(va, a, helpers, cx);
  emit_structure(vb, b, helpers, cx);
  return Literal::unify_vv(va, vb);
}

struct ProcCtx {
  std::string base_pred;
  int disj_counter = 0;
  std::vector<Procedure> aux; // parsed-level procedures awaiting normalization
  const Program* source = nullptr;
};

// Replaces a disjunction (or a conjunction under not) by a call to a fresh
// auxiliary predicate whose clauses are the branches. Works on source-level
// names: `goal` is the unrenamed subgoal, `outside` the source variables
// visible elsewhere in the clause. The shared ones become the predicate's
// arguments; the returned call carries their mapped names.
Literal lower_disjunction(const TermPtr& goal, const std::vector<std::string>& clause_order,
                          const std::set<std::string>& outside, ClauseCtx& cx, ProcCtx& pc) {
  if (term_mentions_cut(goal))
    throw NormalizeError("cut inside a disjunction is not supported");
  std::vector<TermPtr> branches;
  TermPtr g = goal;
  while (g->kind == TermKind::Compound && g->name == ";" && g->args.size() == 2) {
    branches.push_back(g->args[0]);
    g = g->args[1];
  }
  branches.push_back(g);

  std::vector<std::string> gv;
  term_vars(goal, gv);
  std::set<std::string> gvs(gv.begin(), gv.end());
  std::vector<std::string> shared;
  for (auto& v : clause_order)
    if (gvs.count(v) && outside.count(v)) shared.push_back(v);

  std::string name;
  int k = ++pc.disj_counter;
  do {
    name = pc.base_pred + "__disj" + std::to_string(k++);
  } while (pc.source->find(name, (int)shared.size()) != nullptr);

  Procedure aux;
  aux.name = name;
  aux.arity = (int)shared.size();
  for (auto& br : branches) {
    Clause bc;
    bc.pred = name;
    for (auto& v : shared) bc.head_args.push_back(mk_var(v));
    bc.body = goal_term_to_literals(br);
    aux.clauses.push_back(std::move(bc));
  }
  pc.aux.push_back(std::move(aux));

  std::vector<std::string> call_args;
  for (auto& v : shared) call_args.push_back(cx.map(v));
  return Literal::call(name, call_args);
}

// Normalizes one parsed-level literal. Helper unifications go to `out`
// before the core literal; inside a negation the helpers are hoisted and
// only the core stays under not(...).
void normalize_literal(const Literal& l, std::vector<Literal>& out,
                       const std::vector<std::string>& clause_order,
                       const std::set<std::string>& outside, ClauseCtx& cx, ProcCtx& pc);

Literal normalize_negated(const Literal& l, std::vector<Literal>& hoisted,
                          const std::vector<std::string>& clause_order,
                          const std::set<std::string>& outside, ClauseCtx& cx, ProcCtx& pc) {
  switch (l.kind) {
    case LitKind::Cut: throw NormalizeError("cut inside a negation is not supported");
    case LitKind::UnifyVarVar:
      return Literal::unify_vv(cx.map(l.x), cx.map(l.y));
    case LitKind::UnifyVarFunctor: {
      Literal r = rename_literal_vars(l, [&](const std::string& v) { return cx.map(v); });
      return r;
    }
    case LitKind::Call:
      return rename_literal_vars(l, [&](const std::string& v) { return cx.map(v); });
    case LitKind::Negation:
      return Literal::negation(normalize_negated(*l.inner, hoisted, clause_order, outside, cx, pc));
    case LitKind::General: break;
  }
  const TermPtr& g = l.goal;
  if ((g->name == ";" || g->name == ",") && g->args.size() == 2)
    return lower_disjunction(g, clause_order, outside, cx, pc);
  if (g->name == "=" && g->args.size() == 2) {
    Literal core = flatten_equality(g->args[0], g->args[1], hoisted, cx);
    if (core.kind == LitKind::UnifyVarVar && core.x == core.y) {
      // X=X always succeeds, so the negation always fails; two fresh
      // variables unify just as surely and keep the clause well formed.
      return Literal::unify_vv(cx.fresh(), cx.fresh());
    }
    return core;
  }
  // A call with structured or repeated arguments.
  std::vector<std::string> args;
  std::set<std::string> used;
  for (auto& a : g->args) {
    if (a->kind == TermKind::Var) {
      std::string n = cx.map(a->name);
      if (used.insert(n).second) {
        args.push_back(n);
        continue;
      }
      std::string c = cx.fresh();
      hoisted.push_back(Literal::unify_vv(c, n));
      args.push_back(c);
      used.insert(c);
      continue;
    }
    std::string c = cx.fresh();
    emit_structure(c, a, hoisted, cx);
    args.push_back(c);
    used.insert(c);
  }
  return Literal::call(g->name, args);
}

void normalize_literal(const Literal& l, std::vector<Literal>& out,
                       const std::vector<std::string>& clause_order,
                       const std::set<std::string>& outside, ClauseCtx& cx, ProcCtx& pc) {
  switch (l.kind) {
    case LitKind::Cut: out.push_back(Literal::cut()); return;
    case LitKind::UnifyVarVar:
      out.push_back(Literal::unify_vv(cx.map(l.x), cx.map(l.y)));
      return;
    case LitKind::UnifyVarFunctor:
      out.push_back(rename_literal_vars(l, [&](const std::string& v) { return cx.map(v); }));
      return;
    case LitKind::Call:
      out.push_back(rename_literal_vars(l, [&](const std::string& v) { return cx.map(v); }));
      return;
    case LitKind::Negation: {
      std::vector<Literal> hoisted;
      Literal core = normalize_negated(*l.inner, hoisted, clause_order, outside, cx, pc);
      out.insert(out.end(), hoisted.begin(), hoisted.end());
      out.push_back(Literal::negation(std::move(core)));
      return;
    }
    case LitKind::General: break;
  }
  const TermPtr& g = l.goal;
  if ((g->name == ";" || g->name == ",") && g->args.size() == 2) {
    out.push_back(lower_disjunction(g, clause_order, outside, cx, pc));
    return;
  }
  if (g->name == "=" && g->args.size() == 2) {
    std::vector<Literal> helpers;
    Literal core = flatten_equality(g->args[0], g->args[1], helpers, cx);
    if (core.kind == LitKind::UnifyVarVar && core.x == core.y) {
      out.insert(out.end(), helpers.begin(), helpers.end());
      return; // X=X is a no-op
    }
    out.push_back(std::move(core));
    out.insert(out.end(), helpers.begin(), helpers.end());
    return;
  }
  // Call with structured or repeated arguments: bind helpers first.
  std::vector<Literal> helpers;
  Literal core = normalize_negated(l, helpers, clause_order, outside, cx, pc);
  out.insert(out.end(), helpers.begin(), helpers.end());
  out.push_back(std::move(core));
}

// All variable names a parsed-level literal mentions, in textual order.
void literal_source_vars(const Literal& l, std::vector<std::string>& out) {
  switch (l.kind) {
    case LitKind::UnifyVarVar: out.push_back(l.x); out.push_back(l.y); return;
    case LitKind::UnifyVarFunctor:
      out.push_back(l.x);
      for (auto& v : l.vargs) out.push_back(v);
      return;
    case LitKind::Call:
      for (auto& v : l.vargs) out.push_back(v);
      return;
    case LitKind::Cut: return;
    case LitKind::Negation: literal_source_vars(*l.inner, out); return;
    case LitKind::General: term_vars(l.goal, out); return;
  }
}

void canonicalize_clause(Clause& c) {
  std::map<std::string, std::string> m;
  int next = 1;
  auto touch = [&](const std::string& v) {
    if (!m.count(v)) m[v] = "X" + std::to_string(next++);
  };
  for (auto& a : c.head_args) {
    std::vector<std::string> vs;
    term_vars(a, vs);
    for (auto& v : vs) touch(v);
  }
  for (auto& l : c.body) {
    std::vector<std::string> vs;
    literal_source_vars(l, vs);
    for (auto& v : vs) touch(v);
  }
  auto rn = [&](const std::string& v) { return m.at(v); };
  for (auto& a : c.head_args) a = rename_term_vars(a, rn);
  for (auto& l : c.body) l = rename_literal_vars(l, rn);
}

Clause normalize_clause(const Clause& src, ProcCtx& pc) {
  ClauseCtx cx;
  Clause out;
  out.pred = src.pred;

  // Pass 1: claim position names for bare head variables at their first
  // head occurrence.
  int n = (int)src.head_args.size();
  for (int i = 0; i < n; ++i) {
    const TermPtr& a = src.head_args[i];
    if (a->kind == TermKind::Var && !cx.varmap.count(a->name))
      cx.varmap[a->name] = "#" + std::to_string(i + 1);
  }
  // Pass 2: head unifications for structures and repeated variables.
  std::vector<Literal> body;
  for (int i = 0; i < n; ++i) {
    std::string pos = "#" + std::to_string(i + 1);
    out.head_args.push_back(mk_var(pos));
    const TermPtr& a = src.head_args[i];
    if (a->kind == TermKind::Var) {
      if (cx.varmap[a->name] != pos) body.push_back(Literal::unify_vv(pos, cx.varmap[a->name]));
    } else {
      emit_structure(pos, a, body, cx);
    }
  }

  // Variables visible outside each body literal, for disjunction lowering.
  std::vector<std::string> clause_order;
  std::vector<std::vector<std::string>> per_lit;
  {
    std::set<std::string> seen;
    auto add = [&](const std::string& v) {
      if (seen.insert(v).second) clause_order.push_back(v);
    };
    for (auto& a : src.head_args) {
      std::vector<std::string> vs;
      term_vars(a, vs);
      for (auto& v : vs) add(v);
    }
    for (auto& l : src.body) {
      std::vector<std::string> vs;
      literal_source_vars(l, vs);
      for (auto& v : vs) add(v);
      per_lit.push_back(std::move(vs));
    }
  }

  for (size_t i = 0; i < src.body.size(); ++i) {
    std::set<std::string> outside;
    for (auto& a : src.head_args) {
      std::vector<std::string> vs;
      term_vars(a, vs);
      outside.insert(vs.begin(), vs.end());
    }
    for (size_t j = 0; j < src.body.size(); ++j) {
      if (j == i) continue;
      outside.insert(per_lit[j].begin(), per_lit[j].end());
    }
    normalize_literal(src.body[i], body, clause_order, outside, cx, pc);
  }

  out.body = std::move(body);
  canonicalize_clause(out);
  return out;
}

void normalize_proc(const Procedure& src, Program& out, const Program& whole) {
  ProcCtx pc;
  pc.base_pred = src.name;
  pc.source = &whole;
  Procedure np;
  np.name = src.name;
  np.arity = src.arity;
  for (auto& c : src.clauses) np.clauses.push_back(normalize_clause(c, pc));
  out.procs.push_back(std::move(np));
  // Auxiliary procedures may spawn further ones; normalize depth-first.
  for (size_t i = 0; i < pc.aux.size(); ++i) {
    Procedure parsed = pc.aux[i];
    ProcCtx sub;
    sub.base_pred = parsed.name;
    sub.source = &whole;
    Procedure nsub;
    nsub.name = parsed.name;
    nsub.arity = parsed.arity;
    for (auto& c : parsed.clauses) nsub.clauses.push_back(normalize_clause(c, sub));
    out.procs.push_back(std::move(nsub));
    for (auto& extra : sub.aux) pc.aux.push_back(extra);
  }
}

bool canonical_var(const std::string& v, int expect) {
  return v == "X" + std::to_string(expect);
}

bool check_literal(const Literal& l, std::string* why, bool under_not);

bool check_body_vars(const Clause& c, std::string* why) {
  std::set<std::string> seen;
  int next = 1;
  auto touch = [&](const std::string& v) -> bool {
    if (seen.count(v)) return true;
    if (!canonical_var(v, next)) {
      if (why) *why = "variable " + v + " out of canonical order in " + clause_to_string(c);
      return false;
    }
    seen.insert(v);
    ++next;
    return true;
  };
  for (auto& a : c.head_args) {
    std::vector<std::string> vs;
    term_vars(a, vs);
    for (auto& v : vs)
      if (!touch(v)) return false;
  }
  for (auto& l : c.body) {
    std::vector<std::string> vs;
    literal_source_vars(l, vs);
    for (auto& v : vs)
      if (!touch(v)) return false;
  }
  return true;
}

bool check_literal(const Literal& l, std::string* why, bool under_not) {
  switch (l.kind) {
    case LitKind::General:
      if (why) *why = "general goal " + literal_to_string(l);
      return false;
    case LitKind::Cut:
      if (under_not) {
        if (why) *why = "cut under negation";
        return false;
      }
      return true;
    case LitKind::UnifyVarVar:
      if (l.x == l.y) {
        if (why) *why = "trivial unification " + literal_to_string(l);
        return false;
      }
      return true;
    case LitKind::UnifyVarFunctor: {
      std::set<std::string> s{l.x};
      for (auto& v : l.vargs)
        if (!s.insert(v).second) {
          if (why) *why = "repeated variable in " + literal_to_string(l);
          return false;
        }
      return true;
    }
    case LitKind::Call: {
      std::set<std::string> s;
      for (auto& v : l.vargs)
        if (!s.insert(v).second) {
          if (why) *why = "repeated variable in " + literal_to_string(l);
          return false;
        }
      return true;
    }
    case LitKind::Negation: return check_literal(*l.inner, why, true);
  }
  return false;
}

} // namespace

Program normalize_program(const Program& p) {
  Program out;
  for (auto& proc : p.procs) normalize_proc(proc, out, p);
  return out;
}

bool is_normalized(const Program& p, std::string* why) {
  for (auto& proc : p.procs) {
    for (auto& c : proc.clauses) {
      if ((int)c.head_args.size() != proc.arity) {
        if (why) *why = "arity mismatch in " + proc.key();
        return false;
      }
      for (int i = 0; i < proc.arity; ++i) {
        if (c.head_args[i]->kind != TermKind::Var ||
            !canonical_var(c.head_args[i]->name, i + 1)) {
          if (why) *why = "head of " + clause_to_string(c) + " is not positional";
          return false;
        }
      }
      for (auto& l : c.body)
        if (!check_literal(l, why, false)) return false;
      if (!check_body_vars(c, why)) return false;
    }
  }
  return true;
}

} // namespace specpl
