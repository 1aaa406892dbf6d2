#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "specpl/analyzer.hpp"
#include "specpl/normal_form.hpp"
#include "specpl/parser.hpp"
#include "specpl/printer.hpp"
#include "specpl/solver.hpp"
#include "specpl/spec_lang.hpp"

using namespace specpl;

namespace {

const char* kEffaceSrc =
    "efface(X, [Y|T], [Y|T1]) :- efface(X, T, T1), not(X = Y).\n"
    "efface(X, [X|T], T).\n";

// Directionality 1 first: it is the widest class and the one the
// specializer runs under. The two narrower blocks add output and size
// claims for each concrete dataflow.
const char* kEffaceSpecs =
    "efface in(X:gr, T:list(gr), TEff:any) sol(sol =< 1)\n"
    "efface\n"
    "  in(X:gr, T:list(gr), TEff:var)\n"
    "  out(_, _, list(gr))\n"
    "  srel(TEff_out = T_in-1)\n"
    "  sol(sol =< 1)\n"
    "  sexpr(T)\n"
    "efface\n"
    "  in(X:gr, T:any, TEff:list(gr))\n"
    "  out(_, list(gr), _)\n"
    "  srel(TEff_in = T_out-1)\n"
    "  sol(sol =< TEff_in+1)\n"
    "  sexpr(TEff)\n";

const char* kAppendSrc =
    "append([], L, L).\n"
    "append([H|T], L, [H|R]) :- append(T, L, R).\n";

const char* kAppendSpec =
    "append in(L1:list(gr), L2:list(gr), L3:var) sol(sol =< 1) sexpr(L1)\n";

Program normalized(const std::string& src) { return normalize_program(parse_program(src)); }

AnalysisResult analyze(const std::string& src, const std::string& specs) {
  return analyze_program(normalized(src), parse_specs(specs));
}

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

// Evaluates a system under measured values; constraints that mention a
// variable without a defined measure (e.g. the term size of an unbound
// input) are outside what a concrete run can check and are skipped.
void eval_system(const LinCS& e, const std::map<std::string, Rat>& val) {
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
    if (!have) continue;
    bool ok = c.rel == Rel::Le0   ? acc <= Rat(0)
              : c.rel == Rel::Lt0 ? acc < Rat(0)
                                  : acc == Rat(0);
    CHECK(ok);
  }
}

// Runs every described input and checks the combined behaviour of an
// accepted procedure against the engine: solution counts, failure
// classes, untouched arguments, output classes and size laws.
void check_result_sound(const AnnotatedProcedure& ap, const Program& p,
                        const std::vector<Theta>& inputs, int min_hits) {
  const AbstractSequence& B = ap.result;
  int n = ap.arity;
  int hits = 0;
  for (const auto& th : inputs) {
    if (!models(th, B.beta_in)) continue;
    ++hits;
    std::vector<TermPtr> args;
    for (int k = 1; k <= n; ++k) args.push_back(th.at("X" + std::to_string(k)));
    auto [ans, cost] = solve(p, mk_compound(ap.pred, std::move(args)));
    REQUIRE(ans.terminator == Terminator::Complete);
    long long sol = static_cast<long long>(ans.answers.size());

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
    eval_system(B.e_sol, ival);

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
      auto oval = ival;
      for (int k = 1; k <= n; ++k) {
        int idx = B.beta_out.var_index("X" + std::to_string(k));
        auto v = term_norm_value(after.at("X" + std::to_string(k)), B.beta_out.at(idx).nm);
        if (v) oval["o" + std::to_string(k)] = Rat(*v);
      }
      eval_system(B.e_ref_out, oval);
    }
  }
  CHECK(hits >= min_hits);
}

}  // namespace

TEST_CASE("efface passes all three directionality specs") {
  AnalysisResult res = analyze(kEffaceSrc, kEffaceSpecs);
  REQUIRE(res.procedures.size() == 3);
  for (const auto& ap : res.procedures) {
    INFO(ap.pred << " spec #" << ap.spec_index << ": " << ap.reason);
    CHECK(ap.accepted);
  }
  CHECK(res.ok());

  // the wide block carries no induction argument, the narrow ones do
  CHECK_FALSE(res.find("efface", 3, 0)->termination_checked);
  CHECK(res.find("efface", 3, 1)->termination_checked);
  CHECK(res.find("efface", 3, 2)->termination_checked);

  const AnnotatedProcedure* d1 = res.find("efface", 3, 0);
  REQUIRE(d1->clauses.size() == 2);
  CHECK(d1->result.e_sol.entails(con_le(LinExpr::var("sol"), LinExpr::cst(1))));
  CHECK(d1->pair_exclusive(0, 1));
  CHECK(deterministic(d1->result));

  // recursive clause: decompose, build, recurse, negate; five points
  CHECK(d1->clauses[0].points.size() == 5);
  CHECK(d1->clauses[1].points.size() == 2);

  // the declared size drop comes out of the second block's analysis
  const AnnotatedProcedure* s1 = res.find("efface", 3, 1);
  CHECK(s1->result.e_ref_out.entails(
      con_eq(LinExpr::var("o3"), LinExpr::var("i2") - LinExpr::cst(1))));
}

TEST_CASE("efface spec mutants are rejected with the failing component") {
  // claiming no solutions at all
  AnalysisResult r1 = analyze(kEffaceSrc, "efface in(X:gr, T:list(gr), TEff:any) sol(sol = 0)");
  REQUIRE(r1.procedures.size() == 1);
  CHECK_FALSE(r1.procedures[0].accepted);
  CHECK(r1.procedures[0].reason.find("solution-count law not established") == 0);

  // claiming the output keeps the input length
  AnalysisResult r2 = analyze(kEffaceSrc,
                              "efface\n"
                              "  in(X:gr, T:list(gr), TEff:var)\n"
                              "  out(_, _, list(gr))\n"
                              "  srel(TEff_out = T_in)\n"
                              "  sol(sol =< 1)\n"
                              "  sexpr(T)\n");
  REQUIRE(r2.procedures.size() == 1);
  CHECK_FALSE(r2.procedures[0].accepted);
  CHECK(r2.procedures[0].reason.find("size relation not established") == 0);
  CHECK_FALSE(r2.ok());
}

TEST_CASE("append run mode is provably total and deterministic") {
  AnalysisResult res = analyze(kAppendSrc, kAppendSpec);
  REQUIRE(res.procedures.size() == 1);
  const AnnotatedProcedure& ap = res.procedures[0];
  INFO(ap.reason);
  CHECK(ap.accepted);
  CHECK(ap.termination_checked);

  // structural induction over the first argument gives sure success, so
  // together with the claimed bound the count is exactly one
  CHECK(ap.result.e_sol.entails(con_eq(LinExpr::var("sol"), LinExpr::cst(1))));
  CHECK(surely_succeeds(ap.result));
  CHECK(fully_deterministic(ap.result));
  CHECK(ap.pair_exclusive(0, 1));
}

TEST_CASE("accepted behaviours hold on concrete runs") {
  Program eff = normalized(kEffaceSrc);
  AnalysisResult res = analyze(kEffaceSrc, kEffaceSpecs);
  REQUIRE(res.ok());

  std::vector<Theta> inputs;
  int vc = 0;
  for (long long x : {1, 2}) {
    for (const auto& t : ground_int_lists(3)) {
      Theta th;
      th["X1"] = mk_int(x);
      th["X2"] = t;
      th["X3"] = mk_var("F" + std::to_string(++vc));
      inputs.push_back(th);
      Theta th2 = th;
      th2["X3"] = ground_int_lists(2)[vc % 7];
      inputs.push_back(th2);
    }
  }
  check_result_sound(*res.find("efface", 3, 0), eff, inputs, 20);
  check_result_sound(*res.find("efface", 3, 1), eff, inputs, 10);
  check_result_sound(*res.find("efface", 3, 2), eff, inputs, 10);

  Program app = normalized(kAppendSrc);
  AnalysisResult ra = analyze(kAppendSrc, kAppendSpec);
  REQUIRE(ra.ok());
  std::vector<Theta> ains;
  for (const auto& l1 : ground_int_lists(2)) {
    for (const auto& l2 : ground_int_lists(2)) {
      Theta th;
      th["X1"] = l1;
      th["X2"] = l2;
      th["X3"] = mk_var("R" + std::to_string(++vc));
      ains.push_back(th);
    }
  }
  check_result_sound(ra.procedures[0], app, ains, 40);
}

TEST_CASE("cut commitment classes are certified by replay") {
  const char* src =
      "p(X) :- X = a, !.\n"
      "p(X) :- X = b.\n";
  AnalysisResult res = analyze(src, "p in(X:gr) sol(sol =< 1)");
  REQUIRE(res.procedures.size() == 1);
  const AnnotatedProcedure& ap = res.procedures[0];
  INFO(ap.reason);
  CHECK(ap.accepted);
  REQUIRE(ap.clauses.size() == 2);
  CHECK(ap.clauses[0].has_cut);
  CHECK(ap.clauses[0].cut_pos == 1);
  // the test may fail, so the cut is not sure to fire...
  CHECK_FALSE(ap.clauses[0].cut_surely_executed);
  // ...but when it does, the input is pinned to the committed class
  CHECK(ap.clauses[0].sure_cut_class.has_value());
}

TEST_CASE("a leading cut is surely executed") {
  const char* src =
      "p(X) :- !, X = a.\n"
      "p(X) :- X = b.\n";
  AnalysisResult res = analyze(src, "p in(X:gr) sol(sol =< 1)");
  REQUIRE(res.procedures.size() == 1);
  const AnnotatedProcedure& ap = res.procedures[0];
  INFO(ap.reason);
  CHECK(ap.accepted);
  CHECK(ap.clauses[0].cut_pos == 0);
  CHECK(ap.clauses[0].cut_surely_executed);
}

TEST_CASE("identity test is recognized as a test literal") {
  AnalysisResult res =
      analyze("eqt(X, Y) :- X == Y.\n", "eqt in(X:gr, Y:gr) sol(sol =< 1)");
  REQUIRE(res.procedures.size() == 1);
  INFO(res.procedures[0].reason);
  CHECK(res.procedures[0].accepted);
  CHECK(test_literal(res.procedures[0].result));
  CHECK(res.procedures[0].result.U.count(1));
  CHECK(res.procedures[0].result.U.count(2));
}

TEST_CASE("arithmetic split clauses are exclusive") {
  const char* src =
      "max2(X, Y, Z) :- X =< Y, Z = Y.\n"
      "max2(X, Y, Z) :- Y < X, Z = X.\n";
  AnalysisResult res =
      analyze(src, "max2 in(X:int, Y:int, Z:var) out(_, _, int) sol(sol =< 1)");
  REQUIRE(res.procedures.size() == 1);
  const AnnotatedProcedure& ap = res.procedures[0];
  INFO(ap.reason);
  CHECK(ap.accepted);
  CHECK(ap.pair_exclusive(0, 1));
  CHECK(deterministic(ap.result));
}

TEST_CASE("evaluation binds the result size") {
  AnalysisResult res = analyze(
      "inc(X, Y) :- Y is X + 1.\n",
      "inc in(X:int, Y:var) out(_, int) srel(Y_out = X_in+1) sol(sol = 1)");
  REQUIRE(res.procedures.size() == 1);
  INFO(res.procedures[0].reason);
  CHECK(res.procedures[0].accepted);
}

TEST_CASE("negation over an unbound variable warns and fails the clause") {
  AnalysisResult res = analyze("w(X) :- not(X = Y).\n", "w in(X:any) sol(sol = 0)");
  REQUIRE(res.procedures.size() == 1);
  const AnnotatedProcedure& ap = res.procedures[0];
  INFO(ap.reason);
  CHECK(ap.accepted);  // unifying with a fresh variable always succeeds
  bool warned = false;
  for (const auto& w : ap.warnings) {
    if (w.find("unsound-negation-risk") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("declared untouchedness fails through a widening callee") {
  const char* src =
      "anyp(X) :- X = a.\n"
      "tc(X) :- anyp(X).\n";
  AnalysisResult res = analyze(src,
                               "anyp in(X:any) sol(sol =< 1)\n"
                               "tc in(X:gr) sol(sol =< 1)\n");
  REQUIRE(res.procedures.size() == 2);
  CHECK(res.procedures[0].accepted);
  const AnnotatedProcedure& tc = res.procedures[1];
  CHECK_FALSE(tc.accepted);
  CHECK(tc.reason == "untouched-argument claim not established for position 1");
}

TEST_CASE("output annotations bound the computed output class") {
  AnalysisResult res = analyze("b(X) :- X = a.\n", "b in(X:var) out(int) sol(sol = 1)");
  REQUIRE(res.procedures.size() == 1);
  CHECK_FALSE(res.procedures[0].accepted);
  CHECK(res.procedures[0].reason == "output class exceeds the declared out annotations");
}

TEST_CASE("recursion without a decreasing measure is not terminating") {
  AnalysisResult res = analyze("p(X) :- p(X).\n", "p in(X:gr) sol(sol =< 1) sexpr(X)");
  REQUIRE(res.procedures.size() == 1);
  const AnnotatedProcedure& ap = res.procedures[0];
  CHECK_FALSE(ap.accepted);
  CHECK(ap.termination_checked);
  CHECK(ap.reason == "termination not established for recursive call in clause 1");
}

TEST_CASE("calls need a covering specification") {
  AnalysisResult res = analyze("q(X) :- r(X).\nr(X) :- X = a.\n", "q in(X:gr) sol(sol =< 1)");
  REQUIRE(res.procedures.size() == 1);
  CHECK_FALSE(res.procedures[0].accepted);
  CHECK(res.procedures[0].reason == "no covering specification for call r/1 in clause 1");
}

TEST_CASE("driver reports structural problems") {
  AnalysisResult r1 = analyze("p(X) :- X = a.\n", "zzz in(X:gr) sol(sol =< 1)");
  REQUIRE(r1.errors.size() == 1);
  CHECK(r1.errors[0] == "specification references unknown procedure zzz/1");
  CHECK(r1.procedures.empty());

  AnalysisResult r2 =
      analyze_program(parse_program(kEffaceSrc), parse_specs(kEffaceSpecs));
  REQUIRE_FALSE(r2.errors.empty());
  CHECK(r2.errors[0].find("program not in normal form") == 0);
}

TEST_CASE("annotation dump is readable") {
  AnalysisResult res = analyze(kAppendSrc, kAppendSpec);
  REQUIRE(res.procedures.size() == 1);
  std::string dump = annotated_to_string(res.procedures[0]);
  CHECK(dump.find("append/3 spec #0: accepted") != std::string::npos);
  CHECK(dump.find("clause 1:") != std::string::npos);
  CHECK(dump.find("point 0") != std::string::npos);
  CHECK(dump.find("exclusive clause pairs: (1,2)") != std::string::npos);
}
