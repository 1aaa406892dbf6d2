#include "specpl/analyzer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "specpl/abstract_domain.hpp"
#include "specpl/linear.hpp"
#include "specpl/normal_form.hpp"
#include "specpl/printer.hpp"

namespace specpl {

namespace {

// Aborts the analysis of one procedure (e.g. a call with no covering spec).
struct AnalyzeAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string ivar(int k) { return "i" + std::to_string(k); }
std::string ovar(int k) { return "o" + std::to_string(k); }

bool fn_is_nil(const FunctorSym& fn) { return !fn.is_int && fn.name == "[]" && fn.arity == 0; }
bool fn_is_cons(const FunctorSym& fn) { return !fn.is_int && fn.name == "." && fn.arity == 2; }

LinExpr sol_e() { return LinExpr::var("sol"); }
LinExpr q_e() { return LinExpr::var("q"); }

// Drops one variable from a system by projection.
LinCS without_var(const LinCS& cs, const std::string& v) {
  auto keep = cs.vars();
  keep.erase(v);
  return cs.project(keep);
}

// Smallest constant c in 0..8 with cs |= v <= c, if any.
std::optional<int> upper_const(const LinCS& cs, const std::string& v) {
  for (int c = 0; c <= 8; ++c) {
    if (cs.entails(con_le(LinExpr::var(v), LinExpr::cst(c)))) return c;
  }
  return std::nullopt;
}

LinExpr expr_rename(const LinExpr& e, const std::string& from, const std::string& to) {
  LinExpr out = e;
  auto it = out.coef.find(from);
  if (it != out.coef.end()) {
    Rat c = it->second;
    out.coef.erase(it);
    out += LinExpr::var(to).scale(c);
  }
  return out;
}

// Upper-bound halves of a constraint on `v`: a*v + r <= 0 (or < 0) with a > 0.
// An equality contributes its upper half.
std::vector<LinCon> upper_halves(const LinCon& c, const std::string& v) {
  std::vector<LinCon> out;
  Rat a = c.e.coef_of(v);
  if (a == Rat(0)) return out;
  if (c.rel == Rel::Eq0) {
    LinExpr e = c.e;
    if (a < Rat(0)) e.scale(Rat(-1));
    out.push_back(LinCon{e, Rel::Le0});
  } else if (a > Rat(0)) {
    out.push_back(c);
  }
  return out;
}

// One clause's solution law composed with the law of the next literal.
// `prefix` is over sol and the entry sizes i*, `lit` over q and i*; the
// result bounds the total count sum_{prefix answers} q. Upper bounds from
// the literal transfer only when they stay nonnegative on every input
// (the prefix may produce zero answers), which `entry` certifies.
LinCS compose_sol(const LinCS& prefix, const LinCS& lit, const LinCS& entry) {
  LinCS sizes = without_var(prefix, "sol");
  if (prefix.entails(con_le(sol_e(), LinExpr::cst(0))) ||
      lit.entails(con_le(q_e(), LinExpr::cst(0)))) {
    LinCS r = sizes;
    r.add(con_eq(sol_e(), LinExpr::cst(0)));
    return r;
  }
  bool p_one = prefix.entails(con_eq(sol_e(), LinExpr::cst(1)));
  if (p_one) {
    // exactly one reaching state: the literal's law becomes the total
    LinCS r = lit.renamed({{"q", "sol"}});
    r.conjoin(sizes);
    return r;
  }
  if (lit.entails(con_eq(q_e(), LinExpr::cst(1)))) {
    // each prefix answer passes through exactly once
    return prefix;
  }
  bool p_det = prefix.entails(con_le(sol_e(), LinExpr::cst(1)));
  bool l_det = lit.entails(con_le(q_e(), LinExpr::cst(1)));
  LinCS out = sizes;
  bool got = false;
  if (p_det) {
    for (const auto& c : lit.constraints()) {
      for (const auto& up : upper_halves(c, "q")) {
        Rat a = up.e.coef_of("q");
        LinExpr resid = up.e;
        resid += LinExpr::var("q").scale(-a);  // the bound at q = 0
        if (entry.entails(LinCon{resid, up.rel})) {
          out.add(LinCon{expr_rename(up.e, "q", "sol"), up.rel});
          got = true;
        }
      }
    }
  }
  if (l_det) {
    for (const auto& c : prefix.constraints()) {
      for (const auto& up : upper_halves(c, "sol")) {
        out.add(up);
        got = true;
      }
    }
  }
  if (!got) {
    auto pu = upper_const(prefix, "sol");
    auto lu = upper_const(lit, "q");
    if (pu && lu) out.add(con_le(sol_e(), LinExpr::cst(*pu * *lu)));
  }
  out.add(con_ge(sol_e(), LinExpr::cst(0)));
  return out;
}

// Specification prepared for the engine.
struct SpecEntry {
  FormalSpec spec;
  AbstractSequence claim;
  LinCS entry_facts;            // beta_in size facts over i1..in
  std::vector<Norm> in_nm, out_nm;
  int sexpr_pos = 0;            // 1-based induction argument, 0 when absent
  std::vector<std::string> warnings;
};

LinCS entry_facts_of(const AbstractSubst& bin, int arity) {
  if (bin.bottom) return LinCS{};
  std::map<std::string, std::string> ren;
  std::set<std::string> keep;
  for (int j = 1; j <= arity; ++j) {
    int idx = bin.var_index("X" + std::to_string(j));
    ren[bin.size_var(idx)] = ivar(j);
    keep.insert(ivar(j));
  }
  return bin.eqs.renamed(ren).project(keep);
}

SpecEntry make_entry(const FormalSpec& s) {
  SpecEntry e;
  e.spec = s;
  e.claim = spec_to_abstract_sequence(s, &e.warnings);
  int n = s.arity();
  e.entry_facts = entry_facts_of(e.claim.beta_in, n);
  for (int j = 1; j <= n; ++j) {
    std::string x = "X" + std::to_string(j);
    e.in_nm.push_back(e.claim.beta_in.bottom ? Norm::TermSize
                                             : e.claim.beta_in.at(e.claim.beta_in.var_index(x)).nm);
    e.out_nm.push_back(e.claim.beta_out.bottom
                           ? e.in_nm.back()
                           : e.claim.beta_out.at(e.claim.beta_out.var_index(x)).nm);
  }
  if (s.sexpr) {
    for (int j = 0; j < n; ++j) {
      if (s.in_args[j].name == *s.sexpr) e.sexpr_pos = j + 1;
    }
  }
  return e;
}

// Abstract execution state at one program point of a clause.
struct PointState {
  AbstractSubst entry;   // the analyzed input class, over X1..Xn
  AbstractSubst cur;     // current substitution over all clause variables
  AbstractSubst ref;     // refined input class (inputs that can still succeed)
  std::vector<AbstractSubst> fails;  // input classes that surely fail the clause
  std::set<int> U;       // argument positions untouched so far
  LinCS law;             // solution law of the executed prefix, over sol/i*
  std::set<std::string> tracked;  // vars whose value is input-determined in ref
  std::vector<Norm> entry_nm;     // entry norm per argument position
  bool dead = false;     // no execution reaches this point
};

struct LitFlags {
  LinCS sys;  // law of the literal itself, over q/i*
  bool sure_success = false;
  bool sure_failure = false;
  bool touches_nothing = false;
};

struct RecSite {
  int clause = 0;  // 1-based
  int lit = 0;
  const SpecEntry* resolved = nullptr;
  bool measure_ok = false;
};

struct ReplayOutcome {
  bool all_sure = false;
  int sure_fail_at = -1;  // body index of a surely failing literal, if any
  bool unknown = false;   // some literal neither surely succeeds nor fails
};

struct Engine {
  const Program& prog;
  std::vector<SpecEntry>& table;

  // scratch for the procedure under analysis
  const Procedure* proc = nullptr;
  const SpecEntry* se = nullptr;
  int arity = 0;
  std::vector<std::string> headv;
  std::set<std::string> headset;
  LinCS cur_entry_facts;
  std::vector<AbstractSubst> excluded;
  std::vector<RecSite> rec_sites;
  std::vector<std::string>* warn = nullptr;
  int cur_clause = 0;
  int name_ctr = 0;

  bool allow_excluded = true;
  bool recording = true;
  bool theorem_grants = false;   // procedure-level sure success established
  bool induction_grants = false; // inside the induction replays

  Engine(const Program& p, std::vector<SpecEntry>& t) : prog(p), table(t) {}

  std::string fresh(const std::string& pfx) {
    return "#" + pfx + std::to_string(++name_ctr);
  }

  void note(const std::string& w) {
    if (warn && std::find(warn->begin(), warn->end(), w) == warn->end()) warn->push_back(w);
  }

  AbstractSubst restrict_head(const AbstractSubst& b) const {
    if (b.bottom) return beta_bottom();
    return beta_restrict(b, headv, headv);
  }

  const SpecEntry* resolve(const std::string& pred, int n,
                           const AbstractSubst& restricted) const {
    // The claim under verification doubles as the induction hypothesis for
    // direct recursion, so it gets first shot at covering the call.
    if (se && se->spec.pred == pred && se->spec.arity() == n &&
        beta_leq(restricted, se->claim.beta_in)) {
      return se;
    }
    for (const auto& e : table) {
      if (e.spec.pred != pred || e.spec.arity() != n) continue;
      if (beta_leq(restricted, e.claim.beta_in)) return &e;
    }
    return nullptr;
  }

  // ---- point-state construction and projection ----

  PointState entry_state(const AbstractSubst& entry, const Clause& c) const {
    PointState ps;
    ps.entry = entry;
    ps.cur = entry;
    for (const auto& v : c.vars()) {
      if (ps.cur.var_index(v) < 0) beta_add_free_var(ps.cur, v);
    }
    normalize_beta(ps.cur);
    ps.ref = ps.cur;
    for (int j = 1; j <= arity; ++j) {
      ps.U.insert(j);
      int idx = entry.bottom ? -1 : entry.var_index(headv[j - 1]);
      ps.entry_nm.push_back(idx < 0 ? Norm::TermSize : entry.at(idx).nm);
    }
    ps.law = entry_facts_of(entry, arity);
    ps.law.add(con_eq(sol_e(), LinExpr::cst(1)));
    for (const auto& [v, idx] : ps.cur.sv) ps.tracked.insert(v);
    ps.dead = entry.bottom;
    if (ps.dead) {
      ps.cur = beta_bottom();
      ps.ref = beta_bottom();
      ps.law = LinCS{};
      ps.law.add(con_eq(sol_e(), LinExpr::cst(0)));
    }
    return ps;
  }

  // Links between entry sizes i<j> and the current size variables, valid for
  // untouched positions whose measure kept its meaning.
  LinCS entry_links(const PointState& ps) const {
    LinCS ls;
    if (ps.cur.bottom) return ls;
    for (int j = 1; j <= arity; ++j) {
      if (!ps.U.count(j)) continue;
      int idx = ps.cur.var_index(headv[j - 1]);
      if (ps.cur.at(idx).nm != ps.entry_nm[j - 1]) continue;
      ls.add(con_eq(LinExpr::var(ivar(j)), LinExpr::var(ps.cur.size_var(idx))));
    }
    return ls;
  }

  LinCS io_sys(const PointState& ps) const {
    if (ps.cur.bottom) return LinCS{};
    LinCS sys = ps.cur.eqs;
    sys.conjoin(entry_links(ps));
    for (int j = 1; j <= arity; ++j) {
      int idx = ps.cur.var_index(headv[j - 1]);
      if (ps.cur.at(idx).nm != se->out_nm[j - 1]) continue;
      sys.add(con_eq(LinExpr::var(ovar(j)), LinExpr::var(ps.cur.size_var(idx))));
    }
    sys.conjoin(cur_entry_facts);
    std::set<std::string> keep;
    for (int j = 1; j <= arity; ++j) {
      keep.insert(ivar(j));
      keep.insert(ovar(j));
    }
    return sys.project(keep);
  }

  ClausePoint make_point(const PointState& ps, const LitFlags& fl) const {
    ClausePoint pt;
    pt.state = ps.cur;
    pt.seq.beta_in = se->claim.beta_in;
    pt.seq.beta_ref = restrict_head(ps.ref);
    pt.seq.beta_fails = ps.fails;
    pt.seq.U = ps.U;
    pt.seq.beta_out = restrict_head(ps.cur);
    pt.seq.e_ref_out = io_sys(ps);
    pt.seq.e_sol = ps.law;
    pt.lit_sure_success = fl.sure_success;
    pt.lit_sure_failure = fl.sure_failure;
    pt.lit_touches_nothing = fl.touches_nothing;
    pt.lit_deterministic = fl.sys.entails(con_le(q_e(), LinExpr::cst(1)));
    return pt;
  }

  // ---- failure bookkeeping ----

  void push_fail(PointState& ps, const AbstractSubst& el) const {
    if (el.bottom) return;
    for (const auto& f : ps.fails) {
      if (beta_leq(el, f)) return;
    }
    if (ps.fails.size() < 4) ps.fails.push_back(el);
  }

  // Every input of the analyzed class fails the clause here.
  void sure_fail_path(PointState& ps) const {
    if (!ps.dead) push_fail(ps, ps.entry);
    ps.cur = beta_bottom();
    ps.ref = beta_bottom();
    ps.dead = true;
  }

  // ---- ghost handling on the refined input class ----

  // Head variables bound by a literal must not bind inside `ref`; they are
  // replaced by fresh ghosts so the literal only filters.
  AbstractSubst ghosted(const AbstractSubst& b, const std::set<std::string>& to_ghost,
                        std::map<std::string, std::string>& ren) {
    AbstractSubst g = b;
    for (const auto& v : to_ghost) {
      std::string gn = fresh("g");
      beta_add_free_var(g, gn);
      ren[v] = gn;
    }
    return g;
  }

  static AbstractSubst scrub(AbstractSubst b, const std::map<std::string, std::string>& ren) {
    if (b.bottom) return b;
    for (const auto& [v, gn] : ren) b.sv.erase(gn);
    return beta_compact(b);
  }

  std::string sub(const std::map<std::string, std::string>& ren, const std::string& v) const {
    auto it = ren.find(v);
    return it == ren.end() ? v : it->second;
  }

  // Applies one unification to ref under the ghost discipline. `involved` are
  // the literal's variables, `touched` the cur-side touched set.
  void refine_ref_unify(PointState& ps, const std::set<std::string>& involved,
                        const std::set<std::string>& touched,
                        const std::function<UnifyOutcome(const AbstractSubst&,
                                                         const std::map<std::string, std::string>&)>& op) {
    if (ps.ref.bottom) return;
    for (const auto& v : involved) {
      if (!ps.tracked.count(v)) {
        for (const auto& t : touched) ps.tracked.erase(t);
        return;
      }
    }
    std::set<std::string> ghost_heads;
    for (const auto& v : touched) {
      if (headset.count(v)) ghost_heads.insert(v);
    }
    std::map<std::string, std::string> ren;
    if (ghost_heads.empty()) {
      UnifyOutcome rc = op(ps.ref, ren);
      if (rc.sure_failure) {
        sure_fail_path(ps);
      } else {
        ps.ref = rc.after;
      }
      return;
    }
    AbstractSubst g = ghosted(ps.ref, ghost_heads, ren);
    UnifyOutcome rc = op(g, ren);
    if (rc.sure_failure) {
      sure_fail_path(ps);
    } else {
      ps.ref = scrub(rc.after, ren);
    }
    for (const auto& t : touched) ps.tracked.erase(t);
  }

  // Roots reachable from the head variables through frames; constraints on
  // other roots do not survive restriction, so fail elements must not
  // depend on them.
  std::set<int> head_reachable(const AbstractSubst& b) const {
    std::set<int> seen;
    std::function<void(int)> visit = [&](int r) {
      r = b.find(r);
      if (!seen.insert(r).second) return;
      if (b.info[r].frm) {
        for (int kid : b.info[r].frm->kids) visit(kid);
      }
    };
    for (const auto& v : headv) {
      int idx = b.var_index(v);
      if (idx >= 0) visit(idx);
    }
    return seen;
  }

  bool hits_excluded(const AbstractSubst& el) const {
    if (!allow_excluded) return false;
    for (const auto& c : excluded) {
      if (beta_leq(el, c)) return true;
    }
    return false;
  }

  // ---- literal execution ----

  LitFlags exec_literal(PointState& ps, const Literal& l, int cidx) {
    if (ps.dead) {
      LitFlags fl;
      fl.touches_nothing = true;
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    switch (l.kind) {
      case LitKind::UnifyVarVar:
        return exec_unify_vv(ps, l);
      case LitKind::UnifyVarFunctor:
        return exec_unify_vf(ps, l);
      case LitKind::Call:
        return exec_call(ps, l, cidx);
      case LitKind::Negation:
        return exec_neg(ps, l, cidx);
      case LitKind::Cut:
        throw AnalyzeAbort("unexpected cut position in clause " + std::to_string(cidx));
      case LitKind::General:
        throw AnalyzeAbort("general goal in normalized clause " + std::to_string(cidx));
    }
    throw AnalyzeAbort("unreachable literal kind");
  }

  void erase_touched_positions(PointState& ps, const std::set<std::string>& touched) const {
    for (int j = 1; j <= arity; ++j) {
      if (touched.count(headv[j - 1])) ps.U.erase(j);
    }
  }

  static std::set<std::string> real_names(const std::set<std::string>& s) {
    std::set<std::string> out;
    for (const auto& v : s) {
      if (!v.empty() && v[0] != '#') out.insert(v);
    }
    return out;
  }

  LitFlags exec_unify_vv(PointState& ps, const Literal& l) {
    LitFlags fl;
    UnifyOutcome oc = abstract_unify_vars(ps.cur, l.x, l.y);
    fl.sure_success = oc.sure_success;
    fl.sure_failure = oc.sure_failure;
    fl.touches_nothing = oc.touched.empty();
    if (oc.sure_failure) {
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    std::set<std::string> touched = real_names(oc.touched);
    refine_ref_unify(ps, {l.x, l.y}, touched,
                     [&](const AbstractSubst& b, const std::map<std::string, std::string>& ren) {
                       return abstract_unify_vars(b, sub(ren, l.x), sub(ren, l.y));
                     });
    if (ps.dead) {
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      return fl;
    }
    ps.cur = oc.after;
    erase_touched_positions(ps, touched);
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  LitFlags exec_unify_vf(PointState& ps, const Literal& l) {
    LitFlags fl;
    UnifyOutcome oc = abstract_unify_structure(ps.cur, l.x, l.fn, l.vargs);
    fl.sure_success = oc.sure_success;
    fl.sure_failure = oc.sure_failure;
    fl.touches_nothing = oc.touched.empty();
    if (oc.sure_failure) {
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    // A list-constructor test on an input-determined variable splits the
    // inputs: the complement constructor surely fails the clause. The
    // constrained class must survive head restriction to mean anything.
    if (!oc.sure_success && ps.tracked.count(l.x) && !ps.ref.bottom &&
        (fn_is_nil(l.fn) || fn_is_cons(l.fn)) &&
        head_reachable(ps.ref).count(ps.ref.find(ps.ref.var_index(l.x)))) {
      AbstractSubst w = ps.ref;
      UnifyOutcome comp;
      if (fn_is_nil(l.fn)) {
        std::string h = fresh("c"), t = fresh("c");
        beta_add_free_var(w, h);
        beta_add_free_var(w, t);
        comp = abstract_unify_structure(w, l.x, FunctorSym::mk(".", 2), {h, t});
      } else {
        comp = abstract_unify_structure(w, l.x, FunctorSym::mk("[]", 0), {});
      }
      if (!comp.sure_failure && !comp.after.bottom) {
        AbstractSubst m = restrict_head(comp.after);
        push_fail(ps, m);
        // Inputs of the complement class never reach this clause when an
        // earlier cut already captured them; a ground list then has to carry
        // this constructor, and fresh argument variables accept any children.
        const IndexInfo& xi = ps.cur.at(ps.cur.var_index(l.x));
        bool args_fresh = true;
        for (const auto& a : l.vargs) {
          int ai = ps.cur.var_index(a);
          if (ps.cur.at(ai).mo != kModeVar || !ps.cur.is_linear(ai)) args_fresh = false;
          if (ps.cur.shares(ai, ps.cur.var_index(l.x))) args_fresh = false;
          for (const auto& b2 : l.vargs) {
            if (a != b2 && ps.cur.shares(ai, ps.cur.var_index(b2))) args_fresh = false;
          }
        }
        if (args_fresh && xi.mo == kModeGr && ty_leq(xi.ty, ty_list(ty_any())) &&
            hits_excluded(m)) {
          fl.sure_success = true;
        }
      }
    }
    std::set<std::string> involved = {l.x};
    for (const auto& a : l.vargs) involved.insert(a);
    std::set<std::string> touched = real_names(oc.touched);
    refine_ref_unify(ps, involved, touched,
                     [&](const AbstractSubst& b, const std::map<std::string, std::string>& ren) {
                       std::vector<std::string> ra;
                       for (const auto& a : l.vargs) ra.push_back(sub(ren, a));
                       return abstract_unify_structure(b, sub(ren, l.x), l.fn, ra);
                     });
    if (ps.dead) {
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      return fl;
    }
    ps.cur = oc.after;
    erase_touched_positions(ps, touched);
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  // ---- builtins ----

  LitFlags exec_eq(PointState& ps, const Literal& l) {
    LitFlags fl;
    fl.touches_nothing = true;  // ==/2 never binds
    const std::string &x = l.vargs[0], &y = l.vargs[1];
    UnifyOutcome probe = abstract_unify_vars(ps.cur, x, y);
    int mx = ps.cur.at(ps.cur.var_index(x)).mo;
    int my = ps.cur.at(ps.cur.var_index(y)).mo;
    bool var_vs_nonvar = (mx == kModeVar && (my & kModeVar) == 0) ||
                         (my == kModeVar && (mx & kModeVar) == 0);
    if (probe.sure_failure || var_vs_nonvar) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    fl.sure_success = probe.sure_success && probe.touched.empty();
    ps.cur = probe.after;  // success implies the operands coincide
    if (ps.tracked.count(x) && ps.tracked.count(y) && !ps.ref.bottom) {
      UnifyOutcome rp = abstract_unify_vars(ps.ref, x, y);
      if (rp.sure_failure) {
        sure_fail_path(ps);
        fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
        fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
        return fl;
      }
      if (rp.touched.empty()) ps.ref = rp.after;
    }
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  LitFlags exec_neq(PointState& ps, const Literal& l) {
    LitFlags fl;
    fl.touches_nothing = true;
    const std::string &x = l.vargs[0], &y = l.vargs[1];
    UnifyOutcome probe = abstract_unify_vars(ps.cur, x, y);
    int mx = ps.cur.at(ps.cur.var_index(x)).mo;
    int my = ps.cur.at(ps.cur.var_index(y)).mo;
    bool var_vs_nonvar = (mx == kModeVar && (my & kModeVar) == 0) ||
                         (my == kModeVar && (mx & kModeVar) == 0);
    if (probe.sure_success && probe.touched.empty()) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    if (probe.sure_failure || var_vs_nonvar) {
      fl.sure_success = true;
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
      return fl;
    }
    maybe_push_merge_fail(ps, fl, x, y);
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  // Fail element for \== and not(x=y): inputs whose x and y coincide. When
  // that class lies inside an input class already captured by an earlier
  // cut, the literal surely succeeds for inputs reaching this clause.
  void maybe_push_merge_fail(PointState& ps, LitFlags& fl, const std::string& x,
                             const std::string& y) {
    if (ps.ref.bottom || !ps.tracked.count(x) || !ps.tracked.count(y)) return;
    auto reach = head_reachable(ps.ref);
    int rx = ps.ref.find(ps.ref.var_index(x));
    int ry = ps.ref.find(ps.ref.var_index(y));
    if (!reach.count(rx) || !reach.count(ry)) return;
    UnifyOutcome rp = abstract_unify_vars(ps.ref, x, y);
    if (rp.sure_failure || rp.after.bottom) return;
    AbstractSubst m = restrict_head(rp.after);
    push_fail(ps, m);
    int mx = ps.cur.at(ps.cur.var_index(x)).mo;
    int my = ps.cur.at(ps.cur.var_index(y)).mo;
    if (mx == kModeGr && my == kModeGr && hits_excluded(m)) fl.sure_success = true;
  }

  LitFlags exec_arith(PointState& ps, const Literal& l) {
    LitFlags fl;
    fl.touches_nothing = true;
    bool strict = l.pred == "<" || l.pred == ">";
    std::string a = l.vargs[0], b = l.vargs[1];
    if (l.pred == ">" || l.pred == ">=") std::swap(a, b);

    int ia = ps.cur.var_index(a), ib = ps.cur.var_index(b);
    const IndexInfo &fa = ps.cur.at(ia), &fb = ps.cur.at(ib);
    if (ty_is_bot(ty_glb(fa.ty, ty_int())) || ty_is_bot(ty_glb(fb.ty, ty_int())) ||
        fa.mo == kModeVar || fb.mo == kModeVar) {
      // a type error or an unbound operand: treated as failure
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    LinExpr sa = LinExpr::var(ps.cur.size_var(ia)), sb = LinExpr::var(ps.cur.size_var(ib));
    bool numeric = fa.mo == kModeGr && fb.mo == kModeGr && fa.nm == Norm::IntValue &&
                   fb.nm == Norm::IntValue;
    LinCon succ = strict ? con_lt(sa, sb) : con_le(sa, sb);
    LinCon fail = strict ? con_le(sb, sa) : con_lt(sb, sa);
    if (numeric && ps.cur.eqs.entails(succ)) fl.sure_success = true;
    if (numeric && ps.cur.eqs.entails(fail)) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }

    // Fail element first: it uses the entry-side sizes before refinement.
    if (ps.tracked.count(a) && ps.tracked.count(b) && !ps.ref.bottom) {
      auto reach = head_reachable(ps.ref);
      int ra = ps.ref.find(ps.ref.var_index(a));
      int rb = ps.ref.find(ps.ref.var_index(b));
      if (reach.count(ra) && reach.count(rb) && ps.ref.info[ra].mo == kModeGr &&
          ps.ref.info[rb].mo == kModeGr && ps.ref.info[ra].nm == Norm::IntValue &&
          ps.ref.info[rb].nm == Norm::IntValue) {
        AbstractSubst el = ps.ref;
        LinExpr ea = LinExpr::var(el.size_var(el.var_index(a)));
        LinExpr eb = LinExpr::var(el.size_var(el.var_index(b)));
        el.eqs.add(strict ? con_le(eb, ea) : con_lt(eb, ea));
        normalize_beta(el);
        if (!el.bottom) {
          AbstractSubst m = restrict_head(el);
          push_fail(ps, m);
          // The failing half lies inside a class an earlier cut commits to:
          // every input that actually reaches this clause passes the test.
          if (hits_excluded(m)) fl.sure_success = true;
        }
      }
    }

    // Success refines both operands to ground integers and records the test.
    auto refine = [&](AbstractSubst& s) {
      if (s.bottom) return;
      int ja = s.find(s.var_index(a)), jb = s.find(s.var_index(b));
      s.info[ja].mo = mode_glb(s.info[ja].mo, kModeGr);
      s.info[jb].mo = mode_glb(s.info[jb].mo, kModeGr);
      s.info[ja].ty = ty_glb(s.info[ja].ty, ty_int());
      s.info[jb].ty = ty_glb(s.info[jb].ty, ty_int());
      normalize_beta(s);
      if (s.bottom) return;
      LinExpr na = LinExpr::var(s.size_var(s.var_index(a)));
      LinExpr nb = LinExpr::var(s.size_var(s.var_index(b)));
      s.eqs.add(strict ? con_lt(na, nb) : con_le(na, nb));
      normalize_beta(s);
    };
    refine(ps.cur);
    if (ps.cur.bottom) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    if (ps.tracked.count(a) && ps.tracked.count(b)) {
      refine(ps.ref);
      if (ps.ref.bottom) {
        sure_fail_path(ps);
        fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
        fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
        return fl;
      }
    }
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  bool evaluable(const AbstractSubst& b, int idx, int depth = 0) const {
    if (depth > 32) return false;
    int r = b.find(idx);
    const IndexInfo& inf = b.info[r];
    if (inf.mo == kModeGr && ty_leq(inf.ty, ty_int())) return true;
    if (!inf.frm) return false;
    const Frame& f = *inf.frm;
    if (f.fn.is_int) return true;
    if (f.fn.arity == 2 && (f.fn.name == "+" || f.fn.name == "-" || f.fn.name == "*")) {
      return evaluable(b, f.kids[0], depth + 1) && evaluable(b, f.kids[1], depth + 1);
    }
    return false;
  }

  LitFlags exec_is(PointState& ps, const Literal& l) {
    LitFlags fl;
    const std::string &x = l.vargs[0], &y = l.vargs[1];
    int iy = ps.cur.var_index(y);
    const IndexInfo& fy = ps.cur.at(iy);
    bool ev = evaluable(ps.cur, iy);
    bool never = fy.mo == kModeVar ||
                 (!fy.frm && ty_is_bot(ty_glb(fy.ty, ty_int()))) ||
                 (fy.frm && !fy.frm->fn.is_int && fy.frm->fn.arity != 2) ||
                 (fy.frm && fy.frm->fn.arity == 2 && fy.frm->fn.name != "+" &&
                  fy.frm->fn.name != "-" && fy.frm->fn.name != "*");
    if (never) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    bool x_var = ps.cur.at(ps.cur.var_index(x)).mo == kModeVar;
    UnifyOutcome oc;
    if (ty_leq(fy.ty, ty_int())) {
      // the right side already denotes its own value
      oc = abstract_unify_vars(ps.cur, x, y);
    } else {
      AbstractSubst w = ps.cur;
      std::string tmp = fresh("is");
      int it = beta_add_free_var(w, tmp);
      w.info[it].mo = kModeGr;
      w.info[it].ty = ty_int();
      normalize_beta(w);
      if (fy.frm && fy.frm->fn.arity == 2 &&
          (fy.frm->fn.name == "+" || fy.frm->fn.name == "-")) {
        int k0 = w.find(fy.frm->kids[0]), k1 = w.find(fy.frm->kids[1]);
        if (w.info[k0].nm == Norm::IntValue && w.info[k1].nm == Norm::IntValue) {
          LinExpr rhs = LinExpr::var(w.size_var(k0));
          LinExpr e1 = LinExpr::var(w.size_var(k1));
          if (fy.frm->fn.name == "+") rhs += e1; else rhs -= e1;
          w.eqs.add(con_eq(LinExpr::var(w.size_var(it)), rhs));
        }
      }
      oc = abstract_unify_vars(w, x, tmp);
      if (!oc.after.bottom) {
        oc.after.sv.erase(tmp);
      }
    }
    fl.sure_success = x_var && ev;
    fl.sure_failure = oc.sure_failure;
    fl.touches_nothing = real_names(oc.touched).empty();
    if (oc.sure_failure) {
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    std::set<std::string> touched = real_names(oc.touched);
    touched.insert(x);
    ps.cur = oc.after;
    erase_touched_positions(ps, touched);
    for (const auto& t : touched) ps.tracked.erase(t);
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  // ---- calls ----

  LitFlags exec_call(PointState& ps, const Literal& l, int cidx) {
    int n = static_cast<int>(l.vargs.size());
    if (is_builtin(l.pred, n)) {
      if (l.pred == "==") return exec_eq(ps, l);
      if (l.pred == "\\==") return exec_neq(ps, l);
      if (is_arith_comparison(l.pred)) return exec_arith(ps, l);
      if (l.pred == "is") return exec_is(ps, l);
      throw AnalyzeAbort("builtin " + l.pred + "/" + std::to_string(n) +
                         " escaped normalization in clause " + std::to_string(cidx));
    }

    LitFlags fl;
    std::vector<std::string> formals;
    for (int k = 1; k <= n; ++k) formals.push_back("X" + std::to_string(k));
    AbstractSubst restricted = beta_restrict(ps.cur, l.vargs, formals);
    const SpecEntry* ce = resolve(l.pred, n, restricted);
    if (!ce) {
      throw AnalyzeAbort("no covering specification for call " + l.pred + "/" +
                         std::to_string(n) + " in clause " + std::to_string(cidx));
    }

    bool direct_rec = proc && l.pred == proc->name && n == arity;
    bool measure_ok = false;
    if (direct_rec && se->sexpr_pos > 0) {
      int kp = se->sexpr_pos;
      LinCS sys = ps.cur.eqs;
      sys.conjoin(entry_links(ps));
      int idx = ps.cur.var_index(l.vargs[kp - 1]);
      measure_ok = sys.entails(con_le(LinExpr::var(ps.cur.size_var(idx)) + LinExpr::cst(1),
                                      LinExpr::var(ivar(kp))));
    }
    if (direct_rec && recording) {
      rec_sites.push_back(RecSite{cidx, 0, ce, measure_ok});
    }

    bool granted = false;
    if (direct_rec && beta_leq(restricted, se->claim.beta_in)) {
      if (theorem_grants) granted = true;
      if (induction_grants && measure_ok) granted = true;
    }

    // Sure failure: the callee admits no success on this input class.
    bool callee_dead = ce->claim.beta_out.bottom ||
                       ce->claim.e_sol.entails(con_le(sol_e(), LinExpr::cst(0)));
    for (const auto& f : ce->claim.beta_fails) {
      if (beta_leq(restricted, f)) callee_dead = true;
    }
    if (callee_dead) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }

    // The literal law: the callee's solution claim carried to caller sizes.
    {
      LinCS comb = ps.cur.eqs;
      comb.conjoin(entry_links(ps));
      std::map<std::string, std::string> ren;
      ren["sol"] = "q";
      for (int k = 1; k <= n; ++k) {
        int idx = ps.cur.var_index(l.vargs[k - 1]);
        bool nm_ok = ps.cur.at(idx).nm == ce->in_nm[k - 1];
        ren[ivar(k)] = nm_ok ? ps.cur.size_var(idx) : fresh("d");
        ren[ovar(k)] = fresh("d");
      }
      comb.conjoin(ce->claim.e_sol.renamed(ren));
      if (granted) comb.add(con_ge(q_e(), LinExpr::cst(1)));
      std::set<std::string> keep = {"q"};
      for (int j = 1; j <= arity; ++j) keep.insert(ivar(j));
      fl.sys = comb.project(keep);
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
    }
    fl.sure_success = granted;

    // ---- transfer onto cur ----
    std::vector<int> roots;
    std::vector<Norm> prenm;
    for (int k = 0; k < n; ++k) {
      int idx = ps.cur.var_index(l.vargs[k]);
      roots.push_back(ps.cur.find(idx));
      prenm.push_back(ps.cur.at(idx).nm);
    }
    std::set<int> touched_roots;
    for (int k = 0; k < n; ++k) {
      if (!ce->claim.U.count(k + 1)) touched_roots.insert(roots[k]);
    }
    // sharing closure of the touched roots
    std::set<int> closure = touched_roots;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [p, q] : ps.cur.ps) {
        bool ip = closure.count(ps.cur.find(p)), iq = closure.count(ps.cur.find(q));
        if (ip != iq) {
          closure.insert(ps.cur.find(p));
          closure.insert(ps.cur.find(q));
          grew = true;
        }
      }
    }

    // snapshot of the pre-call size relations in a private name space
    std::map<std::string, std::string> snap_ren;
    std::map<int, std::string> pre_name;
    std::map<int, Norm> pre_root_nm;
    for (int i = 0; i < static_cast<int>(ps.cur.parent.size()); ++i) {
      if (ps.cur.find(i) != i) continue;
      pre_name[i] = "v" + std::to_string(i);
      pre_root_nm[i] = ps.cur.info[i].nm;
      snap_ren["s" + std::to_string(i)] = pre_name[i];
    }
    for (int k = 0; k < n; ++k) pre_name[roots[k]] = "u" + std::to_string(k + 1);
    for (int k = 0; k < n; ++k) snap_ren["s" + std::to_string(roots[k])] = pre_name[roots[k]];
    LinCS snap = ps.cur.eqs.renamed(snap_ren);

    beta_weaken_instantiated(ps.cur, touched_roots);
    if (!ps.cur.bottom) {
      const AbstractSubst& co = ce->claim.beta_out;
      for (int k = 0; k < n; ++k) {
        int r = ps.cur.find(ps.cur.var_index(l.vargs[k]));
        const IndexInfo& oi = co.at(co.var_index(formals[k]));
        ps.cur.info[r].mo = mode_glb(ps.cur.info[r].mo, oi.mo);
        ps.cur.info[r].ty = ty_glb(ps.cur.info[r].ty, oi.ty);
      }
      normalize_beta(ps.cur);
    }
    if (ps.cur.bottom) {
      fl.sure_failure = true;
      fl.sure_success = false;
      sure_fail_path(ps);
      LinCS z;
      z.add(con_eq(q_e(), LinExpr::cst(0)));
      fl.sys = z;
      return fl;
    }

    // rebuild the size system: snapshot + callee size relation + identities
    {
      LinCS sys = ps.cur.eqs;
      sys.conjoin(snap);
      std::map<std::string, std::string> imp;
      for (int k = 0; k < n; ++k) {
        bool in_ok = prenm[k] == ce->in_nm[k];
        imp[ivar(k + 1)] = in_ok ? pre_name[roots[k]] : fresh("d");
        int idx = ps.cur.var_index(l.vargs[k]);
        bool out_ok = ps.cur.at(idx).nm == ce->out_nm[k];
        imp[ovar(k + 1)] = out_ok ? ps.cur.size_var(idx) : fresh("d");
      }
      sys.conjoin(ce->claim.e_ref_out.renamed(imp));
      for (const auto& [r, nm0] : pre_root_nm) {
        if (closure.count(r)) continue;
        if (ps.cur.info[r].nm != nm0) continue;
        sys.add(con_eq(LinExpr::var(pre_name[r]), LinExpr::var("s" + std::to_string(r))));
      }
      std::set<std::string> live;
      for (int i = 0; i < static_cast<int>(ps.cur.parent.size()); ++i) {
        if (ps.cur.find(i) == i) live.insert("s" + std::to_string(i));
      }
      ps.cur.eqs = sys.project(live);
      normalize_beta(ps.cur);
      if (ps.cur.bottom) {
        fl.sure_failure = true;
        fl.sure_success = false;
        sure_fail_path(ps);
        LinCS z;
        z.add(con_eq(q_e(), LinExpr::cst(0)));
        fl.sys = z;
        return fl;
      }
    }

    // positions and tracking: anything in the closure may have been bound
    std::set<std::string> touched_vars;
    for (const auto& [v, idx] : ps.cur.sv) {
      if (closure.count(ps.cur.find(idx))) touched_vars.insert(v);
    }
    erase_touched_positions(ps, touched_vars);
    for (const auto& v : touched_vars) ps.tracked.erase(v);
    fl.touches_nothing = touched_vars.empty();
    return fl;
  }

  // ---- negation ----

  LitFlags exec_neg(PointState& ps, const Literal& l, int cidx) {
    LitFlags fl;
    fl.touches_nothing = true;
    const Literal& in = *l.inner;
    for (const auto& v : in.vars()) {
      int idx = ps.cur.var_index(v);
      if (idx >= 0 && ps.cur.at(idx).mo != kModeGr) {
        note("unsound-negation-risk in clause " + std::to_string(cidx) + ": variable " + v +
             " may be nonground at " + literal_to_string(l));
      }
    }
    PointState probe = ps;
    LitFlags fi = exec_literal(probe, in, cidx);
    if (fi.sure_failure) {
      fl.sure_success = true;
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
      return fl;
    }
    if (fi.sure_success) {
      fl.sure_failure = true;
      sure_fail_path(ps);
      fl.sys.add(con_eq(q_e(), LinExpr::cst(0)));
      return fl;
    }
    if (in.kind == LitKind::UnifyVarVar) {
      maybe_push_merge_fail(ps, fl, in.x, in.y);
    } else if (in.kind == LitKind::UnifyVarFunctor && ps.tracked.count(in.x) &&
               !ps.ref.bottom) {
      bool args_ok = true;
      for (const auto& a : in.vargs) {
        if (!ps.tracked.count(a)) args_ok = false;
      }
      auto reach = head_reachable(ps.ref);
      if (args_ok && reach.count(ps.ref.find(ps.ref.var_index(in.x)))) {
        UnifyOutcome rp = abstract_unify_structure(ps.ref, in.x, in.fn, in.vargs);
        if (!rp.sure_failure && !rp.after.bottom) push_fail(ps, restrict_head(rp.after));
      }
    }
    if (fl.sure_success) {
      fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
    } else {
      fl.sys.add(con_ge(q_e(), LinExpr::cst(0)));
      fl.sys.add(con_le(q_e(), LinExpr::cst(1)));
    }
    return fl;
  }

  // ---- cut ----

  void apply_cut(PointState& ps) const {
    LinCS sizes = without_var(ps.law, "sol");
    LinCS out = sizes;
    if (ps.law.entails(con_ge(sol_e(), LinExpr::cst(1)))) {
      out.add(con_eq(sol_e(), LinExpr::cst(1)));
    } else if (ps.law.entails(con_le(sol_e(), LinExpr::cst(0)))) {
      out.add(con_eq(sol_e(), LinExpr::cst(0)));
    } else {
      out.add(con_ge(sol_e(), LinExpr::cst(0)));
      out.add(con_le(sol_e(), LinExpr::cst(1)));
    }
    ps.law = out;
  }

  // ---- clause drivers ----

  AnnotatedClause analyze_clause(const Clause& c, int cidx) {
    cur_clause = cidx;
    AnnotatedClause ac;
    ac.clause = c;
    PointState ps = entry_state(se->claim.beta_in, c);
    ac.points.push_back(make_point(ps, LitFlags{}));
    for (int i = 0; i < static_cast<int>(c.body.size()); ++i) {
      const Literal& lit = c.body[i];
      LitFlags fl;
      if (lit.kind == LitKind::Cut) {
        if (!ac.has_cut) {
          ac.has_cut = true;
          ac.cut_pos = i;
        }
        apply_cut(ps);
        fl.sure_success = true;
        fl.touches_nothing = true;
        fl.sys.add(con_eq(q_e(), LinExpr::cst(1)));
      } else {
        fl = exec_literal(ps, lit, cidx);
        ps.law = compose_sol(ps.law, fl.sys, cur_entry_facts);
      }
      ac.points.push_back(make_point(ps, fl));
    }
    if (ac.has_cut) {
      ac.cut_surely_executed = surely_succeeds(ac.points[ac.cut_pos].seq);
      ac.sure_cut_class = certify_cut_class(c, ac);
    }
    return ac;
  }

  // Replays a clause prefix on a candidate class requiring sure success of
  // every literal; grants follow the engine mode.
  ReplayOutcome replay_prefix(const Clause& c, const AbstractSubst& entry, int upto) {
    ReplayOutcome out;
    PointState rs = entry_state(entry, c);
    LinCS saved = cur_entry_facts;
    cur_entry_facts = entry_facts_of(entry, arity);
    for (int i = 0; i < upto; ++i) {
      if (c.body[i].kind == LitKind::Cut) continue;
      LitFlags fl = exec_literal(rs, c.body[i], cur_clause);
      rs.law = compose_sol(rs.law, fl.sys, cur_entry_facts);
      if (fl.sure_success) continue;
      cur_entry_facts = saved;
      if (fl.sure_failure) {
        out.sure_fail_at = i;
      } else {
        out.unknown = true;
        out.sure_fail_at = i;
      }
      return out;
    }
    cur_entry_facts = saved;
    out.all_sure = true;
    return out;
  }

  std::optional<AbstractSubst> certify_cut_class(const Clause& c, const AnnotatedClause& ac) {
    AbstractSubst cand = ac.points[ac.cut_pos].seq.beta_ref;
    if (cand.bottom) return std::nullopt;
    bool saved_excl = allow_excluded, saved_rec = recording;
    allow_excluded = false;
    recording = false;
    ReplayOutcome ro = replay_prefix(c, cand, ac.cut_pos);
    allow_excluded = saved_excl;
    recording = saved_rec;
    if (!ro.all_sure) return std::nullopt;
    return cand;
  }

  // ---- procedure-level sure success by structural induction ----

  bool class_certified(const AbstractSubst& cls) {
    for (const auto& c : proc->clauses) {
      int cut_at = -1;
      for (int i = 0; i < static_cast<int>(c.body.size()); ++i) {
        if (c.body[i].kind == LitKind::Cut) {
          cut_at = i;
          break;
        }
      }
      ReplayOutcome ro = replay_prefix(c, cls, static_cast<int>(c.body.size()));
      if (ro.all_sure) return true;
      if (cut_at < 0) continue;  // a failing cut-free clause blocks nothing
      if (!ro.unknown && ro.sure_fail_at >= 0 && ro.sure_fail_at < cut_at) continue;
      return false;  // the cut may fire and strand the later clauses
    }
    return false;
  }

  bool try_sure_success_induction() {
    if (se->sexpr_pos == 0) return false;
    const AbstractSubst& bin = se->claim.beta_in;
    if (bin.bottom) return false;
    int idx = bin.var_index(headv[se->sexpr_pos - 1]);
    const IndexInfo& inf = bin.at(idx);
    if (inf.mo & kModeVar) return false;
    if (!inf.ty || inf.ty->kind != TypeExpr::List) return false;

    std::vector<AbstractSubst> classes;
    {
      UnifyOutcome oc =
          abstract_unify_structure(bin, headv[se->sexpr_pos - 1], FunctorSym::mk("[]", 0), {});
      if (!oc.sure_failure && !oc.after.bottom) classes.push_back(restrict_head(oc.after));
    }
    {
      AbstractSubst w = bin;
      std::string h = fresh("h"), t = fresh("t");
      beta_add_free_var(w, h);
      beta_add_free_var(w, t);
      UnifyOutcome oc =
          abstract_unify_structure(w, headv[se->sexpr_pos - 1], FunctorSym::mk(".", 2), {h, t});
      if (!oc.sure_failure && !oc.after.bottom) classes.push_back(restrict_head(oc.after));
    }
    if (classes.empty()) return false;

    bool saved_excl = allow_excluded, saved_rec = recording;
    bool saved_thm = theorem_grants, saved_ind = induction_grants;
    allow_excluded = false;
    recording = false;
    theorem_grants = false;
    induction_grants = true;
    bool ok = true;
    for (const auto& cls : classes) {
      if (!class_certified(cls)) {
        ok = false;
        break;
      }
    }
    allow_excluded = saved_excl;
    recording = saved_rec;
    theorem_grants = saved_thm;
    induction_grants = saved_ind;
    return ok;
  }

  // ---- combining clauses into the procedure behavior ----

  static AbstractSubst lub_or(const AbstractSubst& a, const AbstractSubst& b) {
    if (a.bottom) return b;
    if (b.bottom) return a;
    return beta_lub(a, b);
  }

  // Constraints entailed by every law in the set. The seed supplies extra
  // candidates (typically the claimed law) so a fact every branch entails
  // survives even when no branch lists it syntactically. With no laws the
  // claim holds vacuously.
  static LinCS entailment_join(const std::vector<const LinCS*>& laws, const LinCS& seed) {
    if (laws.empty()) return seed;
    LinCS out;
    std::set<std::string> seen;
    std::vector<LinCon> cands = seed.constraints();
    for (const auto* cs : laws) {
      for (const auto& c : cs->constraints()) cands.push_back(c);
    }
    for (const auto& c : cands) {
      std::string key = con_to_string(c);
      if (!seen.insert(key).second) continue;
      bool all = true;
      for (const auto* other : laws) {
        if (!other->entails(c)) {
          all = false;
          break;
        }
      }
      if (all) out.add(c);
    }
    return out;
  }

  void combine(AnnotatedProcedure& ap, bool established) {
    int m = static_cast<int>(ap.clauses.size());
    AbstractSequence r;
    r.beta_in = se->claim.beta_in;
    r.beta_ref = beta_bottom();
    r.beta_out = beta_bottom();
    for (const auto& ac : ap.clauses) {
      r.beta_ref = lub_or(r.beta_ref, ac.result().beta_ref);
      r.beta_out = lub_or(r.beta_out, ac.result().beta_out);
    }

    bool first = true;
    for (const auto& ac : ap.clauses) {
      if (first) {
        r.U = ac.result().U;
        first = false;
      } else {
        std::set<int> inter;
        for (int j : r.U) {
          if (ac.result().U.count(j)) inter.insert(j);
        }
        r.U = inter;
      }
    }

    // an input surely fails the procedure when it surely fails every clause
    std::vector<AbstractSubst> acc;
    if (m > 0) acc = ap.clauses[0].result().beta_fails;
    for (int z = 1; z < m; ++z) {
      std::vector<AbstractSubst> next;
      for (const auto& a : acc) {
        for (const auto& f : ap.clauses[z].result().beta_fails) {
          AbstractSubst g = beta_glb(a, f);
          if (g.bottom) continue;
          bool dup = false;
          for (const auto& e : next) {
            if (beta_leq(g, e)) dup = true;
          }
          if (!dup && next.size() < 4) next.push_back(g);
        }
      }
      acc = next;
      if (acc.empty()) break;
    }
    r.beta_fails = acc;

    ap.exclusive_pairs.clear();
    bool all_exclusive = true;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        bool e = exclusive(ap.clauses[i].result(), ap.clauses[j].result());
        ap.exclusive_pairs.push_back(e);
        if (!e) all_exclusive = false;
      }
    }

    bool committed_form = true;  // every clause but the last carries a cut
    for (int i = 0; i + 1 < m; ++i) {
      if (!ap.clauses[i].has_cut) committed_form = false;
    }
    bool any_cut = false;
    for (const auto& ac : ap.clauses) any_cut |= ac.has_cut;

    std::vector<const LinCS*> laws;
    for (const auto& ac : ap.clauses) laws.push_back(&ac.result().e_sol);

    if (all_exclusive || committed_form) {
      // at most one clause contributes: any law every clause obeys is total
      r.e_sol = entailment_join(laws, se->claim.e_sol);
    } else if (!any_cut) {
      LinCS sum = cur_entry_facts;
      LinExpr total = LinExpr::cst(0);
      for (int i = 0; i < m; ++i) {
        std::string ci = "c" + std::to_string(i);
        sum.conjoin(laws[i]->renamed({{"sol", ci}}));
        total += LinExpr::var(ci);
      }
      sum.add(con_eq(sol_e(), total));
      std::set<std::string> keep = {"sol"};
      for (int j = 1; j <= arity; ++j) keep.insert(ivar(j));
      r.e_sol = sum.project(keep);
    } else {
      LinCS up = cur_entry_facts;
      LinExpr total = LinExpr::cst(0);
      for (int i = 0; i < m; ++i) {
        std::string ci = "c" + std::to_string(i);
        up.conjoin(laws[i]->renamed({{"sol", ci}}));
        total += LinExpr::var(ci);
      }
      up.add(con_le(sol_e(), total));
      up.add(con_ge(sol_e(), LinExpr::cst(0)));
      std::set<std::string> keep = {"sol"};
      for (int j = 1; j <= arity; ++j) keep.insert(ivar(j));
      r.e_sol = up.project(keep);
    }
    if (established) r.e_sol.add(con_ge(sol_e(), LinExpr::cst(1)));

    std::vector<const LinCS*> outs;
    for (const auto& ac : ap.clauses) {
      if (!ac.result().beta_out.bottom) outs.push_back(&ac.result().e_ref_out);
    }
    r.e_ref_out = entailment_join(outs, se->claim.e_ref_out);

    ap.result = r;
  }

  // ---- acceptance verdict ----

  void coverage(AnnotatedProcedure& ap, bool established) {
    const AbstractSequence& got = ap.result;
    const AbstractSequence& want = se->claim;
    if (!beta_leq(got.beta_out, want.beta_out)) {
      ap.reason = "output class exceeds the declared out annotations";
      return;
    }
    for (const auto& c : want.e_sol.constraints()) {
      if (!got.e_sol.entails(c)) {
        ap.reason = "solution-count law not established: " + con_to_string(c);
        return;
      }
    }
    for (int j : want.U) {
      if (!got.U.count(j)) {
        ap.reason = "untouched-argument claim not established for position " + std::to_string(j);
        return;
      }
    }
    for (const auto& c : want.e_ref_out.constraints()) {
      if (!got.e_ref_out.entails(c)) {
        ap.reason = "size relation not established: " + con_to_string(c);
        return;
      }
    }
    if (se->sexpr_pos > 0) {
      ap.termination_checked = true;
      for (const auto& site : rec_sites) {
        if (site.resolved->sexpr_pos == 0) {
          ap.reason = "termination not established for recursive call in clause " +
                      std::to_string(site.clause) +
                      ": resolved specification declares no induction argument";
          return;
        }
        if (site.resolved->sexpr_pos != se->sexpr_pos) {
          ap.reason = "termination not established for recursive call in clause " +
                      std::to_string(site.clause) + ": induction argument positions differ";
          return;
        }
        if (!site.measure_ok) {
          ap.reason = "termination not established for recursive call in clause " +
                      std::to_string(site.clause);
          return;
        }
      }
    }
    (void)established;
    ap.accepted = true;
  }

  AnnotatedProcedure analyze_proc(const Procedure& pr, const SpecEntry& entry, int spec_index) {
    proc = &pr;
    se = &entry;
    arity = pr.arity;
    headv.clear();
    headset.clear();
    for (int j = 1; j <= arity; ++j) {
      headv.push_back("X" + std::to_string(j));
      headset.insert(headv.back());
    }
    cur_entry_facts = entry.entry_facts;

    AnnotatedProcedure ap;
    ap.pred = pr.name;
    ap.arity = pr.arity;
    ap.spec_index = spec_index;
    ap.claimed = entry.claim;
    ap.warnings = entry.warnings;
    warn = &ap.warnings;

    auto run_pass = [&]() {
      ap.clauses.clear();
      excluded.clear();
      rec_sites.clear();
      for (int i = 0; i < static_cast<int>(pr.clauses.size()); ++i) {
        AnnotatedClause ac = analyze_clause(pr.clauses[i], i + 1);
        if (ac.sure_cut_class) excluded.push_back(*ac.sure_cut_class);
        ap.clauses.push_back(std::move(ac));
      }
    };

    allow_excluded = true;
    recording = true;
    theorem_grants = false;
    induction_grants = false;
    run_pass();

    bool established = try_sure_success_induction();
    if (established) {
      theorem_grants = true;
      run_pass();
      theorem_grants = false;
    }

    combine(ap, established);
    coverage(ap, established);
    warn = nullptr;
    return ap;
  }
};

}  // namespace

bool AnnotatedProcedure::pair_exclusive(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  int n = static_cast<int>(clauses.size());
  int off = 0;
  for (int a = 0; a < i; ++a) off += n - 1 - a;
  off += j - i - 1;
  return off >= 0 && off < static_cast<int>(exclusive_pairs.size()) && exclusive_pairs[off];
}

const AnnotatedProcedure* AnalysisResult::find(const std::string& pred, int arity,
                                               int spec_index) const {
  for (const auto& ap : procedures) {
    if (ap.pred != pred || ap.arity != arity) continue;
    if (spec_index >= 0 && ap.spec_index != spec_index) continue;
    return &ap;
  }
  return nullptr;
}

AnalysisResult analyze_program(const Program& p, const std::vector<FormalSpec>& specs) {
  AnalysisResult res;
  std::string why;
  if (!is_normalized(p, &why)) {
    res.errors.push_back("program not in normal form: " + why);
    return res;
  }
  std::vector<SpecEntry> table;
  table.reserve(specs.size());
  for (const auto& s : specs) table.push_back(make_entry(s));

  Engine eng(p, table);
  for (int k = 0; k < static_cast<int>(table.size()); ++k) {
    const SpecEntry& e = table[k];
    const Procedure* pr = p.find(e.spec.pred, e.spec.arity());
    if (!pr) {
      res.errors.push_back("specification references unknown procedure " + e.spec.pred + "/" +
                           std::to_string(e.spec.arity()));
      continue;
    }
    AnnotatedProcedure ap;
    try {
      ap = eng.analyze_proc(*pr, e, k);
    } catch (const AnalyzeAbort& ex) {
      ap.pred = pr->name;
      ap.arity = pr->arity;
      ap.spec_index = k;
      ap.claimed = e.claim;
      ap.accepted = false;
      ap.reason = ex.what();
    }
    if (!ap.accepted) {
      res.errors.push_back(ap.pred + "/" + std::to_string(ap.arity) + " spec #" +
                           std::to_string(k) + " rejected: " + ap.reason);
    }
    res.procedures.push_back(std::move(ap));
  }
  return res;
}

std::string annotated_to_string(const AnnotatedProcedure& ap) {
  std::ostringstream os;
  os << ap.pred << "/" << ap.arity << " spec #" << ap.spec_index << ": "
     << (ap.accepted ? "accepted" : "rejected");
  if (!ap.accepted && !ap.reason.empty()) os << " (" << ap.reason << ")";
  if (ap.termination_checked) os << " [termination checked]";
  os << "\n";
  for (const auto& w : ap.warnings) os << "warning: " << w << "\n";
  os << "claim:\n" << seq_to_string(ap.claimed) << "\n";
  for (size_t k = 0; k < ap.clauses.size(); ++k) {
    const AnnotatedClause& ac = ap.clauses[k];
    os << "clause " << (k + 1) << ": " << clause_to_string(ac.clause) << "\n";
    if (ac.has_cut) {
      os << "  cut at literal " << (ac.cut_pos + 1)
         << (ac.cut_surely_executed ? ", surely executed" : "")
         << (ac.sure_cut_class ? ", certified commit class" : "") << "\n";
    }
    for (size_t i = 0; i < ac.points.size(); ++i) {
      os << "  point " << i;
      if (i > 0) {
        os << " after " << literal_to_string(ac.clause.body[i - 1]);
        std::vector<std::string> marks;
        if (ac.points[i].lit_sure_success) marks.push_back("sure-success");
        if (ac.points[i].lit_sure_failure) marks.push_back("sure-failure");
        if (ac.points[i].lit_touches_nothing) marks.push_back("touches-nothing");
        if (!marks.empty()) {
          os << " [";
          for (size_t z = 0; z < marks.size(); ++z) os << (z ? "," : "") << marks[z];
          os << "]";
        }
      }
      os << ":\n";
      std::istringstream is(seq_to_string(ac.points[i].seq));
      std::string line;
      while (std::getline(is, line)) os << "    " << line << "\n";
    }
  }
  os << "result:\n" << seq_to_string(ap.result) << "\n";
  int m = static_cast<int>(ap.clauses.size());
  if (m > 1) {
    os << "exclusive clause pairs:";
    bool any = false;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        if (ap.pair_exclusive(i, j)) {
          os << " (" << (i + 1) << "," << (j + 1) << ")";
          any = true;
        }
      }
    }
    if (!any) os << " none";
    os << "\n";
  }
  return os.str();
}

}  // namespace specpl
