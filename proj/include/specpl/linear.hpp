#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace specpl {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::rational<BigInt>;

// Linear expression c1*v1 + ... + cn*vn + k over exact rationals.
// Invariant: coef never stores a zero coefficient.
struct LinExpr {
  std::map<std::string, Rat> coef;
  Rat k;

  static LinExpr var(const std::string& name);
  static LinExpr cst(long long v);
  static LinExpr cst(const Rat& v);

  bool is_constant() const { return coef.empty(); }
  Rat coef_of(const std::string& name) const;

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& scale(const Rat& f);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) {
    a += b;
    return a;
  }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) {
    a -= b;
    return a;
  }

  bool operator==(const LinExpr& o) const { return coef == o.coef && k == o.k; }
};

enum class Rel { Le0, Lt0, Eq0 };

// One constraint: e =< 0, e < 0 or e = 0.
struct LinCon {
  LinExpr e;
  Rel rel = Rel::Le0;

  bool operator==(const LinCon& o) const { return rel == o.rel && e == o.e; }
};

LinCon con_le(const LinExpr& a, const LinExpr& b);  // a =< b
LinCon con_lt(const LinExpr& a, const LinExpr& b);  // a < b
LinCon con_eq(const LinExpr& a, const LinExpr& b);  // a = b
LinCon con_ge(const LinExpr& a, const LinExpr& b);  // a >= b
LinCon con_gt(const LinExpr& a, const LinExpr& b);  // a > b

std::string rat_to_string(const Rat& r);
std::string expr_to_string(const LinExpr& e);
std::string con_to_string(const LinCon& c);

// Conjunction of linear constraints over named rational variables.
// satisfiable() and entails() are exact over the rationals via variable
// elimination (substitution for equalities, Fourier-Motzkin for
// inequalities). Both stay sound when the variables range over integers:
// rational unsatisfiability and rational entailment transfer, the engine
// merely loses precision on integer-only gaps such as 2x = 1.
class LinCS {
 public:
  LinCS() = default;

  void add(LinCon c);
  void conjoin(const LinCS& o);

  bool satisfiable() const;
  bool entails(const LinCon& c) const;

  // Eliminates every variable not in keep; the result is the exact
  // rational projection (entails the same constraints over keep).
  LinCS project(const std::set<std::string>& keep) const;

  // Unmapped names pass through. Mapping two sources to one target
  // identifies the variables.
  LinCS renamed(const std::map<std::string, std::string>& m) const;

  std::set<std::string> vars() const;
  const std::vector<LinCon>& constraints() const { return cons_; }
  bool empty() const { return cons_.empty(); }

  std::string str() const;

 private:
  std::vector<LinCon> cons_;
};

}  // namespace specpl
