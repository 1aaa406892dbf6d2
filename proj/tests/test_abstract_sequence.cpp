#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "specpl/abstract_sequence.hpp"
#include "specpl/parser.hpp"
#include "specpl/printer.hpp"

using namespace specpl;

namespace {

TermPtr T(const std::string& s) { return parse_term_string(s); }

using Theta = std::map<std::string, TermPtr>;

TermPtr apply_subst(const TermPtr& t, const std::map<std::string, TermPtr>& bind) {
  if (t->kind == TermKind::Var) {
    auto it = bind.find(t->name);
    if (it == bind.end()) return t;
    if (it->second->kind == TermKind::Var && it->second->name == t->name) return t;
    return apply_subst(it->second, bind);
  }
  if (t->kind != TermKind::Compound) return t;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(apply_subst(a, bind));
  return mk_compound(t->name, std::move(args));
}

std::vector<TermPtr> ground_int_lists(int max_len) {
  std::vector<TermPtr> out = {mk_nil()};
  std::vector<std::vector<long long>> cur = {{}};
  for (int l = 0; l < max_len; ++l) {
    std::vector<std::vector<long long>> next;
    for (const auto& xs : cur) {
      for (long long v : {1, 2}) {
        auto ys = xs;
        ys.push_back(v);
        std::vector<TermPtr> items;
        for (long long y : ys) items.push_back(mk_int(y));
        out.push_back(mk_list(items));
        next.push_back(std::move(ys));
      }
    }
    cur = std::move(next);
  }
  return out;
}

LinCS lincs(const std::vector<LinCon>& cs) {
  LinCS e;
  for (const auto& c : cs) e.add(c);
  return e;
}

// Runs every universe input that the sequence describes and checks each
// claim a true decision procedure makes, plus the out/fails/U/size
// components of the sequence itself.
void check_seq_sound(const AbstractSequence& B, const Program& p, const std::string& pred,
                     const std::vector<Theta>& inputs, int min_hits) {
  int n = static_cast<int>(B.beta_in.sv.size());
  int hits = 0;
  for (const auto& th : inputs) {
    if (!models(th, B.beta_in)) continue;
    ++hits;
    std::vector<TermPtr> args;
    for (int k = 1; k <= n; ++k) args.push_back(th.at("X" + std::to_string(k)));
    auto [ans, cost] = solve(p, mk_compound(pred, std::move(args)));
    REQUIRE(ans.terminator == Terminator::Complete);
    long long sol = static_cast<long long>(ans.answers.size());

    if (deterministic(B)) CHECK(sol <= 1);
    if (fully_deterministic(B)) CHECK(sol == 1);
    if (surely_succeeds(B)) CHECK(sol >= 1);
    for (const auto& f : B.beta_fails) {
      if (models(th, f)) CHECK(sol == 0);
    }

    std::map<std::string, Rat> ival;
    ival["sol"] = Rat(sol);
    for (int k = 1; k <= n; ++k) {
      int idx = B.beta_in.var_index("X" + std::to_string(k));
      auto v = term_norm_value(th.at("X" + std::to_string(k)), B.beta_in.at(idx).nm);
      if (v) ival["i" + std::to_string(k)] = Rat(*v);
    }
    auto eval = [&](const LinCS& e, const std::map<std::string, Rat>& val) {
      for (const auto& c : e.constraints()) {
        Rat acc = c.e.k;
        bool have = true;
        for (const auto& [v, cf] : c.e.coef) {
          auto it = val.find(v);
          if (it == val.end()) {
            have = false;
            break;
          }
          acc += cf * it->second;
        }
        REQUIRE(have);
        bool ok = c.rel == Rel::Le0   ? acc <= Rat(0)
                  : c.rel == Rel::Lt0 ? acc < Rat(0)
                                      : acc == Rat(0);
        CHECK(ok);
      }
    };
    eval(B.e_sol, ival);

    for (const auto& a : ans.answers) {
      Theta after;
      for (int k = 1; k <= n; ++k) {
        std::string x = "X" + std::to_string(k);
        after[x] = apply_subst(th.at(x), a.bind);
      }
      CHECK(models(after, B.beta_out));
      CHECK(models(th, B.beta_ref));
      for (int k : B.U) {
        std::string x = "X" + std::to_string(k);
        CHECK(term_equal(after.at(x), th.at(x)));
      }
      if (test_literal(B)) {
        for (int k = 1; k <= n; ++k) {
          std::string x = "X" + std::to_string(k);
          CHECK(term_equal(after.at(x), th.at(x)));
        }
      }
      auto oval = ival;
      for (int k = 1; k <= n; ++k) {
        int idx = B.beta_out.var_index("X" + std::to_string(k));
        auto v = term_norm_value(after.at("X" + std::to_string(k)), B.beta_out.at(idx).nm);
        if (v) oval["o" + std::to_string(k)] = Rat(*v);
      }
      eval(B.e_ref_out, oval);
    }
  }
  CHECK(hits >= min_hits);
}

// X1 ground int list, X2 and X3 free.
AbstractSubst in_list_free_free() {
  AbstractSubst b = beta_all_free({"X1", "X2", "X3"});
  int x1 = b.var_index("X1");
  b.info[x1].mo = kModeGr;
  b.info[x1].ty = ty_list(ty_int());
  normalize_beta(b);
  return b;
}

// Same input class, X1 refined to a nonempty list.
AbstractSubst ref_nonempty_list() {
  AbstractSubst r = in_list_free_free();
  int x1 = r.var_index("X1");
  IndexInfo h;
  h.mo = kModeGr;
  h.ty = ty_int();
  h.nm = Norm::IntValue;
  int hi = beta_add_index(r, h);
  IndexInfo t;
  t.mo = kModeGr;
  t.ty = ty_list(ty_int());
  t.nm = Norm::ListLen;
  int ti = beta_add_index(r, t);
  r.info[x1].frm = Frame{FunctorSym::mk(".", 2), {hi, ti}};
  normalize_beta(r);
  return r;
}

AbstractSubst fail_empty_list() {
  AbstractSubst f = in_list_free_free();
  f.info[f.var_index("X1")].frm = Frame{FunctorSym::mk("[]", 0), {}};
  normalize_beta(f);
  return f;
}

// Head unification literal p(X1,X2,X3) :- X1=[X2|X3] under the ground
// list input: deterministic, fails exactly on [].
AbstractSequence seq_decompose_list() {
  AbstractSequence B;
  B.beta_in = in_list_free_free();
  B.beta_ref = ref_nonempty_list();
  seq_add_fail(B, fail_empty_list());
  B.U = {1};
  B.beta_out = abstract_unify_structure(in_list_free_free(), "X1", FunctorSym::mk(".", 2),
                                        {"X2", "X3"})
                   .after;
  B.e_ref_out = lincs({con_eq(LinExpr::var("o1"), LinExpr::var("i1")),
                       con_eq(LinExpr::var("o3"), LinExpr::var("i1") - LinExpr::cst(1))});
  B.e_sol = lincs({con_ge(LinExpr::var("sol"), LinExpr::cst(0)),
                   con_le(LinExpr::var("sol"), LinExpr::cst(1))});
  return B;
}

// The same literal on a fresh variable: a sure single success.
AbstractSequence seq_build_list() {
  AbstractSequence B;
  B.beta_in = beta_all_free({"X1", "X2", "X3"});
  B.beta_ref = B.beta_in;
  B.U = {2, 3};
  B.beta_out =
      abstract_unify_structure(B.beta_in, "X1", FunctorSym::mk(".", 2), {"X2", "X3"}).after;
  B.e_sol = lincs({con_eq(LinExpr::var("sol"), LinExpr::cst(1))});
  return B;
}

// Ground syntactic equality test p(X1,X2) :- X1==X2.
AbstractSequence seq_ground_eq() {
  AbstractSequence B;
  AbstractSubst b = beta_all_free({"X1", "X2"});
  for (const auto& v : {"X1", "X2"}) {
    b.info[b.var_index(v)].mo = kModeGr;
  }
  normalize_beta(b);
  B.beta_in = b;
  B.beta_ref = b;
  B.U = {1, 2};
  B.beta_out = b;
  B.e_sol = lincs({con_ge(LinExpr::var("sol"), LinExpr::cst(0)),
                   con_le(LinExpr::var("sol"), LinExpr::cst(1))});
  return B;
}

AbstractSubst in_ground_any() {
  AbstractSubst b = beta_all_free({"X1"});
  b.info[b.var_index("X1")].mo = kModeGr;
  normalize_beta(b);
  return b;
}

AbstractSubst ref_int_const(long long v) {
  AbstractSubst r = in_ground_any();
  r.info[r.var_index("X1")].frm = Frame{FunctorSym::mk_int(v), {}};
  normalize_beta(r);
  return r;
}

AbstractSubst ref_atom_const(const std::string& a) {
  AbstractSubst r = in_ground_any();
  r.info[r.var_index("X1")].frm = Frame{FunctorSym::mk(a, 0), {}};
  normalize_beta(r);
  return r;
}

}  // namespace

TEST_CASE("solution count tables") {
  AbstractSequence B;
  B.beta_in = beta_all_free({"X1"});
  B.beta_ref = B.beta_in;
  B.beta_out = B.beta_in;

  B.e_sol = lincs({con_le(LinExpr::var("sol"), LinExpr::cst(1))});
  CHECK(deterministic(B));
  CHECK_FALSE(fully_deterministic(B));

  B.e_sol = lincs({con_le(LinExpr::var("sol"), LinExpr::var("i1") + LinExpr::cst(1))});
  CHECK_FALSE(deterministic(B));

  B.e_sol = lincs({con_eq(LinExpr::var("sol"), LinExpr::cst(0))});
  CHECK(deterministic(B));
  CHECK_FALSE(surely_succeeds(B));

  B.e_sol = lincs({con_eq(LinExpr::var("sol"), LinExpr::cst(1))});
  CHECK(fully_deterministic(B));
  CHECK(surely_succeeds(B));
  CHECK(deterministic(B));

  // a failing class forbids the sure decisions
  seq_add_fail(B, beta_all_free({"X1"}));
  CHECK_FALSE(fully_deterministic(B));
  CHECK_FALSE(surely_succeeds(B));
  CHECK(deterministic(B));

  // sol bounded by an entailed positive size
  AbstractSequence C;
  C.beta_in = beta_all_free({"X1"});
  C.beta_ref = C.beta_in;
  C.beta_out = C.beta_in;
  C.e_sol = lincs({con_eq(LinExpr::var("sol"), LinExpr::var("i1")),
                   con_ge(LinExpr::var("i1"), LinExpr::cst(1))});
  CHECK(surely_succeeds(C));
  CHECK_FALSE(deterministic(C));

  // strengthening e_sol keeps deterministic decisions
  B.e_sol.add(con_le(LinExpr::var("sol"), LinExpr::cst(0)));
  CHECK(deterministic(B));
}

TEST_CASE("fail set stays bounded") {
  AbstractSequence B;
  B.beta_in = beta_all_free({"X1"});
  for (int i = 0; i < 7; ++i) {
    AbstractSubst f = beta_all_free({"X1"});
    if (i % 2 == 0) f.info[f.var_index("X1")].mo = kModeGr;
    normalize_beta(f);
    seq_add_fail(B, f);
  }
  CHECK(B.beta_fails.size() == 4);
  seq_add_fail(B, beta_bottom());  // ignored
  CHECK(B.beta_fails.size() == 4);
}

TEST_CASE("test literal needs full untouchedness") {
  AbstractSequence eq = seq_ground_eq();
  CHECK(test_literal(eq));
  eq.U = {1};
  CHECK_FALSE(test_literal(eq));

  AbstractSequence bind = seq_build_list();
  CHECK_FALSE(test_literal(bind));  // X1 is instantiated
  CHECK(fully_deterministic(bind));
}

TEST_CASE("exclusive by refinement clash and by failure class") {
  AbstractSequence b1;
  b1.beta_in = in_ground_any();
  b1.beta_ref = ref_int_const(1);
  b1.beta_out = b1.beta_ref;
  AbstractSequence b2 = b1;
  b2.beta_ref = ref_atom_const("foo");
  b2.beta_out = b2.beta_ref;
  CHECK(exclusive(b1, b2));
  CHECK(exclusive(b2, b1));
  CHECK_FALSE(exclusive(b1, b1));

  // an always failing branch excludes anything
  AbstractSequence dead = b1;
  dead.beta_ref = beta_bottom();
  CHECK(exclusive(dead, b1));
  CHECK(exclusive(b1, dead));

  // failure class route: the second branch fails exactly where the
  // first one succeeds
  AbstractSequence lst;
  lst.beta_in = in_list_free_free();
  lst.beta_ref = ref_nonempty_list();
  lst.beta_out = lst.beta_ref;
  AbstractSequence loose;
  loose.beta_in = in_list_free_free();
  loose.beta_ref = in_list_free_free();
  loose.beta_out = in_list_free_free();
  seq_add_fail(loose, ref_nonempty_list());
  CHECK(exclusive(lst, loose));
  CHECK(exclusive(loose, lst));
  AbstractSequence loose2 = loose;
  loose2.beta_fails.clear();
  CHECK_FALSE(exclusive(lst, loose2));
}

TEST_CASE("coverage is componentwise inclusion") {
  AbstractSequence c = seq_decompose_list();
  CHECK(covered_by(c, c));

  AbstractSequence weaker = c;
  weaker.e_sol = lincs({con_le(LinExpr::var("sol"), LinExpr::cst(2))});
  CHECK(covered_by(c, weaker));
  CHECK_FALSE(covered_by(weaker, c));  // sol =< 2 does not entail sol =< 1

  AbstractSequence moreU = c;
  moreU.U = {1, 2};
  CHECK(covered_by(moreU, c));
  CHECK_FALSE(covered_by(c, moreU));

  AbstractSequence wideOut = c;
  wideOut.beta_out = in_list_free_free();
  AbstractSubst any3 = beta_all_free({"X1", "X2", "X3"});
  for (const auto& v : {"X1", "X2", "X3"}) {
    any3.info[any3.var_index(v)].mo = kModeAny;
  }
  normalize_beta(any3);
  wideOut.beta_out = any3;
  CHECK(covered_by(c, wideOut));
  CHECK_FALSE(covered_by(wideOut, c));

  AbstractSequence srel = c;
  srel.e_ref_out = lincs({con_le(LinExpr::var("o3"), LinExpr::var("i1"))});
  CHECK(covered_by(c, srel));  // o3 = i1-1 entails o3 =< i1
  CHECK_FALSE(covered_by(srel, c));
}

TEST_CASE("decisions hold on concrete runs") {
  Program p = parse_program(
      "p(X1,X2,X3) :- X1=[X2|X3].\n"
      "eq(X1,X2) :- X1==X2.\n"
      "one(X1) :- X1=1.\n"
      "fooa(X1) :- X1=foo.\n");

  std::vector<Theta> list_inputs;
  for (const auto& l : ground_int_lists(3)) {
    list_inputs.push_back({{"X1", l}, {"X2", T("P")}, {"X3", T("Q")}});
  }
  AbstractSequence dec = seq_decompose_list();
  CHECK(deterministic(dec));
  CHECK_FALSE(fully_deterministic(dec));
  check_seq_sound(dec, p, "p", list_inputs, 10);

  std::vector<Theta> free_inputs = {{{"X1", T("A")}, {"X2", T("B")}, {"X3", T("C")}}};
  AbstractSequence bld = seq_build_list();
  CHECK(fully_deterministic(bld));
  CHECK(surely_succeeds(bld));
  check_seq_sound(bld, p, "p", free_inputs, 1);

  std::vector<Theta> eq_inputs;
  for (const char* a : {"1", "2", "foo", "[1,2]", "[]", "f(1)"}) {
    for (const char* b : {"1", "2", "foo", "[1,2]", "[]", "f(1)"}) {
      eq_inputs.push_back({{"X1", T(a)}, {"X2", T(b)}});
    }
  }
  AbstractSequence eq = seq_ground_eq();
  CHECK(test_literal(eq));
  check_seq_sound(eq, p, "eq", eq_inputs, 30);

  // exclusivity on concrete ground inputs: never both succeed
  AbstractSequence b1;
  b1.beta_in = in_ground_any();
  b1.beta_ref = ref_int_const(1);
  b1.beta_out = b1.beta_ref;
  AbstractSequence b2 = b1;
  b2.beta_ref = ref_atom_const("foo");
  b2.beta_out = b2.beta_ref;
  REQUIRE(exclusive(b1, b2));
  for (const char* in : {"1", "2", "foo", "bar", "[]", "[1]", "f(1)"}) {
    Theta th = {{"X1", T(in)}};
    if (!models(th, b1.beta_in)) continue;
    auto [a1, c1] = solve(p, mk_compound("one", {th.at("X1")}));
    auto [a2, c2] = solve(p, mk_compound("fooa", {th.at("X1")}));
    CHECK((a1.answers.empty() || a2.answers.empty()));
  }
}

TEST_CASE("sequence dump") {
  AbstractSequence B = seq_decompose_list();
  std::string s = seq_to_string(B);
  CHECK(s.find("in:\n") != std::string::npos);
  CHECK(s.find("ref:\n") != std::string::npos);
  CHECK(s.find("fails:\n") != std::string::npos);
  CHECK(s.find("U: {1}") != std::string::npos);
  CHECK(s.find("srel: ") != std::string::npos);
  CHECK(s.find("sol: ") != std::string::npos);
  CHECK(s == seq_to_string(B));
}
