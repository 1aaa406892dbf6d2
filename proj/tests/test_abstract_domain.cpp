#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "specpl/abstract_domain.hpp"
#include "specpl/parser.hpp"
#include "specpl/solver.hpp"

using namespace specpl;

namespace {

TermPtr T(const std::string& s) { return parse_term_string(s); }

TermPtr apply_subst(const TermPtr& t, const std::map<std::string, TermPtr>& bind) {
  if (t->kind == TermKind::Var) {
    auto it = bind.find(t->name);
    if (it == bind.end()) return t;
    return apply_subst(it->second, bind);
  }
  if (t->kind != TermKind::Compound) return t;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(apply_subst(a, bind));
  return mk_compound(t->name, std::move(args));
}

using Theta = std::map<std::string, TermPtr>;

// Concrete substitutions over X1..X3 drawn from a small pool. Each slot
// either keeps its own variables or reuses shared ones, so the universe
// exercises aliasing, sharing and nonlinearity. Dependent rows make X1
// echo X2 and X3 so structured abstract states have concrete members.
std::vector<Theta> universe() {
  const std::vector<std::string> pool = {
      "U", "1", "5", "foo", "[]", "[1|U]", "[U]", "[U,V]", "f(U,V)", "f(U,U)", "[1,2]",
  };
  std::vector<Theta> out;
  auto inst = [](const std::string& tpl, const std::string& slot, bool shared) {
    std::string s;
    for (char c : tpl) {
      if (c == 'U' || c == 'V') {
        s += shared ? std::string(1, c) + "s" : std::string(1, c) + slot;
      } else {
        s += c;
      }
    }
    return s;
  };
  for (size_t a = 0; a < pool.size(); ++a) {
    for (size_t b = 0; b < pool.size(); ++b) {
      for (int sa = 0; sa < 2; ++sa) {
        for (int sb = 0; sb < 2; ++sb) {
          const char* x3 =
              (a + b) % 4 == 0 ? "W" : (a + b) % 4 == 1 ? "2" : (a + b) % 4 == 2 ? "foo" : "[Us]";
          Theta th;
          th["X1"] = T(inst(pool[a], "1", sa));
          th["X2"] = T(inst(pool[b], "2", sb));
          th["X3"] = T(x3);
          out.push_back(std::move(th));
        }
      }
    }
  }
  for (size_t b = 0; b < pool.size(); ++b) {
    for (size_t c = 0; c < pool.size(); ++c) {
      for (int sb = 0; sb < 2; ++sb) {
        for (int sc = 0; sc < 2; ++sc) {
          std::string tb = inst(pool[b], "2", sb);
          std::string tc = inst(pool[c], "3", sc);
          Theta cons;
          cons["X1"] = T("[" + tb + "|" + tc + "]");
          cons["X2"] = T(tb);
          cons["X3"] = T(tc);
          out.push_back(std::move(cons));
          Theta alias;
          alias["X1"] = T(tb);
          alias["X2"] = T(tb);
          alias["X3"] = T(tc);
          out.push_back(std::move(alias));
          Theta twin;
          twin["X1"] = T("[" + tb + "|" + tb + "]");
          twin["X2"] = T(tb);
          twin["X3"] = T(tb);
          out.push_back(std::move(twin));
        }
      }
    }
  }
  // corner rows the cycling above misses: three independent vars, and
  // var-var against a fixed X3
  for (const char* x3 : {"C", "foo", "5", "[1,2]", "[C|D]"}) {
    out.push_back({{"X1", T("A")}, {"X2", T("B")}, {"X3", T(x3)}});
    out.push_back({{"X1", T("A2")}, {"X2", T("B2")}, {"X3", T(x3)}});
    out.push_back({{"X1", T("[1|A]")}, {"X2", T("B")}, {"X3", T(x3)}});
    out.push_back({{"X1", T("A")}, {"X2", T("5")}, {"X3", T(x3)}});
  }
  out.push_back({{"X1", T("E")}, {"X2", T("F")}, {"X3", T("foo")}});
  out.push_back({{"X1", T("A3")}, {"X2", T("5")}, {"X3", T("C3")}});
  out.push_back({{"X1", T("B4")}, {"X2", T("5")}, {"X3", T("D4")}});
  out.push_back({{"X1", T("[D|E]")}, {"X2", T("D")}, {"X3", T("E")}});
  return out;
}

Theta apply_theta(const Theta& th, const std::map<std::string, TermPtr>& bind) {
  Theta out;
  for (const auto& [v, t] : th) out[v] = apply_subst(t, bind);
  return out;
}

int root_of(const AbstractSubst& b, const std::string& v) { return b.var_index(v); }

LinExpr svar(const AbstractSubst& b, const std::string& v) {
  return LinExpr::var(b.size_var(root_of(b, v)));
}

// Abstract unification must over-approximate the concrete one on every
// member of the input concretization, and its sure flags must hold.
void check_unify_vars_sound(const AbstractSubst& beta, const std::string& x,
                            const std::string& y, const std::vector<Theta>& univ,
                            int* hits = nullptr) {
  UnifyOutcome out = abstract_unify_vars(beta, x, y);
  for (const auto& th : univ) {
    if (!models(th, beta)) continue;
    if (hits) ++*hits;
    auto mgu = unify_terms(th.at(x), th.at(y));
    if (mgu) {
      CHECK_FALSE(out.sure_failure);
      Theta after = apply_theta(th, mgu->bind);
      CHECK(models(after, out.after));
      for (const auto& [v, t] : th) {
        if (!out.touched.count(v)) CHECK(term_equal(after.at(v), t));
      }
    } else {
      CHECK_FALSE(out.sure_success);
    }
  }
}

void check_unify_structure_sound(const AbstractSubst& beta, const std::string& x,
                                 const FunctorSym& fn, const std::vector<std::string>& args,
                                 const std::vector<Theta>& univ) {
  UnifyOutcome out = abstract_unify_structure(beta, x, fn, args);
  for (const auto& th : univ) {
    if (!models(th, beta)) continue;
    TermPtr rhs;
    if (fn.is_int) {
      rhs = mk_int(fn.value);
    } else if (fn.arity == 0) {
      rhs = mk_atom(fn.name);
    } else {
      std::vector<TermPtr> as;
      for (const auto& a : args) as.push_back(th.at(a));
      rhs = mk_compound(fn.name, std::move(as));
    }
    auto mgu = unify_terms(th.at(x), rhs);
    if (mgu) {
      CHECK_FALSE(out.sure_failure);
      Theta after = apply_theta(th, mgu->bind);
      CHECK(models(after, out.after));
      for (const auto& [v, t] : th) {
        if (!out.touched.count(v)) CHECK(term_equal(after.at(v), t));
      }
    } else {
      CHECK_FALSE(out.sure_success);
    }
  }
}

}  // namespace

TEST_CASE("mode lattice tables") {
  CHECK(mode_fix(6) == kModeAny);
  CHECK(mode_lub(kModeGr, kModeVar) == kModeGv);
  CHECK(mode_lub(kModeVar, kModeNgv) == kModeAny);  // 6 widens
  CHECK(mode_glb(kModeGv, kModeNovar) == kModeGr);
  CHECK(unify_mode(kModeGr, kModeAny) == kModeGr);
  CHECK(unify_mode(kModeVar, kModeVar) == kModeVar);
  CHECK(unify_mode(kModeVar, kModeNgv) == kModeNgv);
  CHECK(unify_mode(kModeNgv, kModeNgv) == kModeNovar);
  CHECK(unify_mode(kModeVar, kModeNovar) == kModeNovar);
  CHECK(unify_mode(kModeVar, kModeAny) == kModeAny);
  CHECK(mode_after_binding(kModeVar) == kModeAny);
  CHECK(mode_after_binding(kModeNgv) == kModeNovar);
  CHECK(mode_after_binding(kModeGr) == kModeGr);

  // exhaustive soundness of unify_mode on concrete pairs
  std::vector<TermPtr> terms = {T("A"), T("1"), T("foo"), T("[1|A]"), T("f(A,B)"), T("[1,2]")};
  for (const auto& a : terms) {
    for (const auto& b : terms) {
      auto mgu = unify_terms(a, b);
      if (!mgu) continue;
      int pred = unify_mode(term_mode(a), term_mode(b));
      CHECK((term_mode(apply_subst(a, mgu->bind)) & pred) != 0);
      CHECK((term_mode(apply_subst(b, mgu->bind)) & pred) != 0);
    }
  }
}

TEST_CASE("type lattice laws") {
  std::vector<TypePtr> sample = {ty_bot(),           ty_any(),           ty_int(),
                                 ty_atom(),          ty_list(ty_bot()),  ty_list(ty_int()),
                                 ty_list(ty_any()),  ty_list(ty_atom()), ty_list(ty_list(ty_int()))};
  for (const auto& a : sample) {
    CHECK(ty_leq(a, a));
    CHECK(ty_leq(ty_bot(), a));
    CHECK(ty_leq(a, ty_any()));
    for (const auto& b : sample) {
      TypePtr g = ty_glb(a, b);
      TypePtr l = ty_lub(a, b);
      CHECK(ty_leq(g, a));
      CHECK(ty_leq(g, b));
      CHECK(ty_leq(a, l));
      CHECK(ty_leq(b, l));
      for (const auto& c : sample) {
        if (ty_leq(c, a) && ty_leq(c, b)) CHECK(ty_leq(c, g));
        if (ty_leq(a, c) && ty_leq(b, c)) CHECK(ty_leq(l, c));
        if (ty_leq(a, b) && ty_leq(b, c)) CHECK(ty_leq(a, c));
      }
    }
  }
  CHECK(ty_leq(ty_list(ty_bot()), ty_atom()));
  CHECK_FALSE(ty_leq(ty_list(ty_int()), ty_atom()));
  CHECK(ty_equal(ty_glb(ty_atom(), ty_list(ty_int())), ty_list(ty_bot())));
  CHECK(ty_is_bot(ty_glb(ty_int(), ty_atom())));
  CHECK(ty_equal(ty_lub(ty_atom(), ty_list(ty_bot())), ty_atom()));
  CHECK(ty_is_ground(ty_list(ty_int())));
  CHECK_FALSE(ty_is_ground(ty_list(ty_any())));

  // membership is monotone and closed under instantiation
  std::vector<TermPtr> terms = {T("A"), T("1"), T("foo"), T("[]"),     T("[1,2]"),
                                T("[A]"), T("[[1],[]]"), T("f(1)"), T("[1|A]")};
  for (const auto& t : terms) {
    for (const auto& a : sample) {
      if (!term_has_type(t, a)) continue;
      for (const auto& b : sample) {
        if (ty_leq(a, b)) CHECK(term_has_type(t, b));
      }
      TermPtr inst = apply_subst(t, {{"A", T("[7]")}});
      CHECK(term_has_type(inst, a));
    }
  }
}

TEST_CASE("norms") {
  CHECK(norm_for_type(ty_list(ty_any())) == Norm::ListLen);
  CHECK(norm_for_type(ty_int()) == Norm::IntValue);
  CHECK(norm_for_type(ty_any()) == Norm::TermSize);
  CHECK(*term_norm_value(T("[1,2,3]"), Norm::ListLen) == 3);
  CHECK(!term_norm_value(T("[1|A]"), Norm::ListLen));
  CHECK(*term_norm_value(T("7"), Norm::IntValue) == 7);
  CHECK(!term_norm_value(T("foo"), Norm::IntValue));
  CHECK(*term_norm_value(T("f(A,1)"), Norm::TermSize) == 2);
  CHECK(*term_norm_value(T("A"), Norm::TermSize) == 0);
  CHECK(*term_norm_value(T("[1,2]"), Norm::TermSize) == 5);  // two conses, two ints, one nil
}

TEST_CASE("all free state and membership") {
  AbstractSubst b = beta_all_free({"X1", "X2", "X3"});
  CHECK(models({{"X1", T("A")}, {"X2", T("B")}, {"X3", T("C")}}, b));
  // sharing between slots contradicts the empty may-share set
  CHECK_FALSE(models({{"X1", T("A")}, {"X2", T("[1|A]")}, {"X3", T("C")}}, b));
  CHECK_FALSE(models({{"X1", T("1")}, {"X2", T("B")}, {"X3", T("C")}}, b));
  CHECK_FALSE(models({{"X1", T("A")}, {"X2", T("A")}, {"X3", T("C")}}, b));
}

TEST_CASE("abstract unification is sound on a concrete universe") {
  auto univ = universe();
  AbstractSubst free3 = beta_all_free({"X1", "X2", "X3"});

  std::vector<AbstractSubst> states;
  states.push_back(free3);
  auto o1 = abstract_unify_structure(free3, "X1", FunctorSym::mk(".", 2), {"X2", "X3"});
  REQUIRE_FALSE(o1.after.bottom);
  states.push_back(o1.after);  // X1 = [X2|X3]
  auto o2 = abstract_unify_structure(free3, "X2", FunctorSym::mk_int(5), {});
  REQUIRE_FALSE(o2.after.bottom);
  states.push_back(o2.after);  // X2 = 5
  auto o3 = abstract_unify_vars(o1.after, "X2", "X3");
  REQUIRE_FALSE(o3.after.bottom);
  states.push_back(o3.after);  // X1 = [X2|X3], X2 = X3
  auto o4 = abstract_unify_vars(free3, "X1", "X2");
  states.push_back(o4.after);  // X1 = X2
  AbstractSubst weak = o1.after;
  beta_weaken_instantiated(weak, {root_of(weak, "X2")});
  REQUIRE_FALSE(weak.bottom);
  states.push_back(weak);
  auto o5 = abstract_unify_structure(free3, "X3", FunctorSym::mk("foo", 0), {});
  states.push_back(o5.after);  // X3 = foo

  for (const auto& st : states) {
    int hits = 0;
    check_unify_vars_sound(st, "X1", "X2", univ, &hits);
    check_unify_vars_sound(st, "X1", "X3", univ);
    check_unify_vars_sound(st, "X2", "X3", univ);
    check_unify_structure_sound(st, "X1", FunctorSym::mk(".", 2), {"X2", "X3"}, univ);
    check_unify_structure_sound(st, "X2", FunctorSym::mk_int(1), {}, univ);
    check_unify_structure_sound(st, "X3", FunctorSym::mk("f", 2), {"X1", "X2"}, univ);
    check_unify_structure_sound(st, "X1", FunctorSym::mk("[]", 0), {}, univ);
    CHECK(hits >= 3);  // every state must have concrete members in the universe
  }
}

TEST_CASE("unify flags and refinement") {
  AbstractSubst b = beta_all_free({"X1", "X2", "X3"});

  SUBCASE("var against var is a sure success that touches both") {
    auto out = abstract_unify_vars(b, "X1", "X2");
    CHECK(out.sure_success);
    CHECK(out.touched.count("X1"));
    CHECK(out.touched.count("X2"));
    CHECK_FALSE(out.touched.count("X3"));
    CHECK(out.after.var_index("X1") == out.after.var_index("X2"));
  }

  SUBCASE("binding an int fixes mode, type and value") {
    auto out = abstract_unify_structure(b, "X1", FunctorSym::mk_int(5), {});
    CHECK(out.sure_success);
    const auto& a = out.after;
    CHECK(a.at(root_of(a, "X1")).mo == kModeGr);
    CHECK(ty_equal(a.at(root_of(a, "X1")).ty, ty_int()));
    CHECK(a.eqs.entails(con_eq(svar(a, "X1"), LinExpr::cst(5))));
  }

  SUBCASE("clashing structures fail surely") {
    auto s1 = abstract_unify_structure(b, "X1", FunctorSym::mk_int(5), {});
    auto s2 = abstract_unify_structure(s1.after, "X2", FunctorSym::mk("foo", 0), {});
    auto out = abstract_unify_vars(s2.after, "X1", "X2");
    CHECK(out.sure_failure);
    CHECK(out.after.bottom);
  }

  SUBCASE("equal ground structures are a sure success touching nothing") {
    auto s1 = abstract_unify_structure(b, "X1", FunctorSym::mk_int(5), {});
    auto s2 = abstract_unify_structure(s1.after, "X2", FunctorSym::mk_int(5), {});
    auto out = abstract_unify_vars(s2.after, "X1", "X2");
    CHECK(out.sure_success);
    CHECK(out.touched.empty());
  }

  SUBCASE("list construction tracks length") {
    auto c1 = abstract_unify_structure(b, "X1", FunctorSym::mk(".", 2), {"X2", "X3"});
    auto c2 = abstract_unify_structure(c1.after, "X3", FunctorSym::mk("[]", 0), {});
    const auto& a = c2.after;
    REQUIRE_FALSE(a.bottom);
    CHECK(a.at(root_of(a, "X1")).nm == Norm::ListLen);
    CHECK(a.eqs.entails(con_eq(svar(a, "X1"), LinExpr::cst(1))));
    CHECK(a.at(root_of(a, "X1")).mo == kModeNgv);  // head still free
    // grounding the head grounds the list
    auto c3 = abstract_unify_structure(a, "X2", FunctorSym::mk_int(9), {});
    CHECK(c3.after.at(root_of(c3.after, "X1")).mo == kModeGr);
  }

  SUBCASE("occur check failure is definite") {
    auto c1 = abstract_unify_structure(b, "X1", FunctorSym::mk(".", 2), {"X2", "X3"});
    auto out = abstract_unify_structure(c1.after, "X2", FunctorSym::mk("f", 1), {"X2"});
    CHECK(out.sure_failure);
  }

  SUBCASE("unifying shared sides is not surely successful") {
    auto c1 = abstract_unify_structure(b, "X1", FunctorSym::mk(".", 2), {"X2", "X3"});
    auto out = abstract_unify_structure(c1.after, "X1", FunctorSym::mk(".", 2), {"X3", "X2"});
    CHECK_FALSE(out.sure_success);
    CHECK_FALSE(out.sure_failure);
  }
}

TEST_CASE("meet join and order are sound") {
  auto univ = universe();
  AbstractSubst free3 = beta_all_free({"X1", "X2", "X3"});
  std::vector<AbstractSubst> states;
  states.push_back(free3);
  states.push_back(abstract_unify_structure(free3, "X1", FunctorSym::mk(".", 2), {"X2", "X3"}).after);
  states.push_back(abstract_unify_structure(free3, "X2", FunctorSym::mk_int(5), {}).after);
  states.push_back(abstract_unify_vars(states[1], "X2", "X3").after);
  states.push_back(abstract_unify_vars(free3, "X1", "X2").after);
  states.push_back(abstract_unify_structure(free3, "X1", FunctorSym::mk("foo", 0), {}).after);
  {
    AbstractSubst weak = states[1];
    beta_weaken_instantiated(weak, {root_of(weak, "X2")});
    states.push_back(weak);
  }

  for (const auto& a : states) {
    CHECK(beta_leq(a, a));
    CHECK(beta_equal(a, a));
    for (const auto& b : states) {
      AbstractSubst g = beta_glb(a, b);
      AbstractSubst l = beta_lub(a, b);
      CHECK(beta_leq(g, a));
      CHECK(beta_leq(g, b));
      CHECK(beta_leq(a, l));
      CHECK(beta_leq(b, l));
      bool le = beta_leq(a, b);
      for (const auto& th : univ) {
        bool ma = models(th, a), mb = models(th, b);
        if (ma && mb) CHECK(models(th, g));
        if (ma || mb) CHECK(models(th, l));
        if (le && ma) CHECK(mb);
      }
    }
  }

  // structure clash makes the meet empty
  AbstractSubst i5 = abstract_unify_structure(free3, "X1", FunctorSym::mk_int(5), {}).after;
  AbstractSubst at = abstract_unify_structure(free3, "X1", FunctorSym::mk("foo", 0), {}).after;
  CHECK(beta_glb(i5, at).bottom);
  // aliasing distinct free vars contradicts their sure disjointness
  CHECK(beta_glb(free3, states[4]).bottom);
  // weakening only relaxes: the strict state sits below it
  CHECK(beta_leq(states[1], states[6]));
  CHECK_FALSE(beta_leq(states[6], states[1]));
  // the aliased state is not below the unaliased one: it shares where
  // the unaliased state promises disjointness
  CHECK_FALSE(beta_leq(states[3], states[1]));
}

TEST_CASE("weakening covers instantiation") {
  AbstractSubst free3 = beta_all_free({"X1", "X2", "X3"});
  AbstractSubst lst = abstract_unify_structure(free3, "X1", FunctorSym::mk(".", 2), {"X2", "X3"}).after;
  AbstractSubst weak = lst;
  beta_weaken_instantiated(weak, {root_of(weak, "X2")});
  // identity instantiation still fits
  Theta th = {{"X1", T("[A|B]")}, {"X2", T("A")}, {"X3", T("B")}};
  CHECK(models(th, lst));
  CHECK(models(th, weak));
  // X2 bound to ground: fits the weakened state, not the original strict one
  Theta th2 = {{"X1", T("[1|B]")}, {"X2", T("1")}, {"X3", T("B")}};
  CHECK(models(th2, weak));
  // X2 bound to a structure over fresh callee vars
  Theta th3 = {{"X1", T("[f(C)|B]")}, {"X2", T("f(C)")}, {"X3", T("B")}};
  CHECK(models(th3, weak));
  CHECK_FALSE(models(th3, lst));
  // the sibling keeps its var mode bit but may have been bound
  CHECK((weak.at(root_of(weak, "X3")).mo & kModeVar) != 0);
}

TEST_CASE("restriction keeps exactly the asked projection") {
  AbstractSubst free3 = beta_all_free({"X1", "X2", "X3"});
  AbstractSubst lst = abstract_unify_structure(free3, "X1", FunctorSym::mk(".", 2), {"X2", "X3"}).after;
  AbstractSubst r = beta_restrict(lst, {"X1", "X3"}, {"X1", "X2"});
  CHECK(r.sv.size() == 2);
  CHECK(models({{"X1", T("[A|B]")}, {"X2", T("B")}}, r));
  CHECK_FALSE(models({{"X1", T("A")}, {"X2", T("B")}}, r));  // frame survives
  // frame detail about the dropped head also survives reachably
  int x1 = root_of(r, "X1");
  REQUIRE(r.at(x1).frm.has_value());
  CHECK(r.at(x1).frm->fn == FunctorSym::mk(".", 2));
}

TEST_CASE("normalization is idempotent and detects inconsistency") {
  AbstractSubst free3 = beta_all_free({"X1", "X2", "X3"});
  std::vector<AbstractSubst> states;
  states.push_back(free3);
  states.push_back(abstract_unify_structure(free3, "X1", FunctorSym::mk(".", 2), {"X2", "X3"}).after);
  states.push_back(abstract_unify_vars(states[1], "X2", "X3").after);
  for (const auto& st : states) {
    AbstractSubst again = st;
    normalize_beta(again);
    CHECK(beta_equal(again, st));
    AbstractSubst c1 = beta_compact(st);
    CHECK(beta_to_string(c1) == beta_to_string(beta_compact(c1)));
  }

  // an unsatisfiable size system empties the state
  AbstractSubst bad = beta_all_free({"X1"});
  bad.eqs.add(con_le(LinExpr::var(bad.size_var(root_of(bad, "X1"))), LinExpr::cst(-1)));
  normalize_beta(bad);
  CHECK(bad.bottom);

  // a frame under mode var is impossible
  AbstractSubst bad2 = beta_all_free({"X1"});
  bad2.info[root_of(bad2, "X1")].frm = Frame{FunctorSym::mk("foo", 0), {}};
  normalize_beta(bad2);
  CHECK(bad2.bottom);
}

TEST_CASE("state dump is stable") {
  AbstractSubst b = beta_all_free({"X1", "X2"});
  auto out = abstract_unify_structure(b, "X1", FunctorSym::mk(".", 2), {"X2", "X2"});
  std::string s = beta_to_string(out.after);
  CHECK(s == beta_to_string(out.after));
  CHECK(s.find("i0{X1}") != std::string::npos);
  CHECK(s.find("[i1|i1]") != std::string::npos);
  CHECK(beta_to_string(beta_bottom()) == "bottom");
}
