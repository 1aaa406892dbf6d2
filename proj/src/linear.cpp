#include "specpl/linear.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace specpl {

LinExpr LinExpr::var(const std::string& name) {
  LinExpr e;
  e.coef[name] = Rat(1);
  return e;
}

LinExpr LinExpr::cst(long long v) {
  LinExpr e;
  e.k = Rat(BigInt(v));
  return e;
}

LinExpr LinExpr::cst(const Rat& v) {
  LinExpr e;
  e.k = v;
  return e;
}

Rat LinExpr::coef_of(const std::string& name) const {
  auto it = coef.find(name);
  return it == coef.end() ? Rat(0) : it->second;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [v, c] : o.coef) {
    Rat nc = coef_of(v) + c;
    if (nc == Rat(0)) {
      coef.erase(v);
    } else {
      coef[v] = nc;
    }
  }
  k += o.k;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  LinExpr neg = o;
  neg.scale(Rat(-1));
  return *this += neg;
}

LinExpr& LinExpr::scale(const Rat& f) {
  if (f == Rat(0)) {
    coef.clear();
    k = Rat(0);
    return *this;
  }
  for (auto& [v, c] : coef) c *= f;
  k *= f;
  return *this;
}

LinCon con_le(const LinExpr& a, const LinExpr& b) { return {a - b, Rel::Le0}; }
LinCon con_lt(const LinExpr& a, const LinExpr& b) { return {a - b, Rel::Lt0}; }
LinCon con_eq(const LinExpr& a, const LinExpr& b) { return {a - b, Rel::Eq0}; }
LinCon con_ge(const LinExpr& a, const LinExpr& b) { return {b - a, Rel::Le0}; }
LinCon con_gt(const LinExpr& a, const LinExpr& b) { return {b - a, Rel::Lt0}; }

std::string rat_to_string(const Rat& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != BigInt(1)) os << "/" << r.denominator();
  return os.str();
}

std::string expr_to_string(const LinExpr& e) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : e.coef) {
    if (first) {
      if (c < Rat(0)) os << "-";
    } else {
      os << (c < Rat(0) ? " - " : " + ");
    }
    Rat a = c < Rat(0) ? -c : c;
    if (a != Rat(1)) os << rat_to_string(a) << "*";
    os << v;
    first = false;
  }
  if (first) return rat_to_string(e.k);
  if (e.k != Rat(0)) {
    os << (e.k < Rat(0) ? " - " : " + ");
    os << rat_to_string(e.k < Rat(0) ? -e.k : e.k);
  }
  return os.str();
}

std::string con_to_string(const LinCon& c) {
  // Positive terms stay left, negated negative terms move right, so
  // x - y + 3 =< 0 prints as x + 3 =< y.
  LinExpr lhs, rhs;
  for (const auto& [v, cf] : c.e.coef) {
    if (cf > Rat(0)) {
      lhs.coef[v] = cf;
    } else {
      rhs.coef[v] = -cf;
    }
  }
  if (c.e.k > Rat(0)) {
    lhs.k = c.e.k;
  } else {
    rhs.k = -c.e.k;
  }
  const char* rel = c.rel == Rel::Le0 ? " =< " : c.rel == Rel::Lt0 ? " < " : " = ";
  return expr_to_string(lhs) + rel + expr_to_string(rhs);
}

namespace {

bool is_trivially_true(const LinCon& c) {
  if (!c.e.coef.empty()) return false;
  switch (c.rel) {
    case Rel::Le0:
      return c.e.k <= Rat(0);
    case Rel::Lt0:
      return c.e.k < Rat(0);
    case Rel::Eq0:
      return c.e.k == Rat(0);
  }
  return false;
}

bool is_trivially_false(const LinCon& c) {
  return c.e.coef.empty() && !is_trivially_true(c);
}

// Scales to a unit leading coefficient. Inequalities only admit positive
// factors; equalities also get their sign normalized.
LinCon canonical(LinCon c) {
  if (c.e.coef.empty()) return c;
  Rat lead = c.e.coef.begin()->second;
  Rat f = c.rel == Rel::Eq0 ? Rat(1) / lead
                            : Rat(1) / (lead < Rat(0) ? -lead : lead);
  c.e.scale(f);
  return c;
}

// For parallel inequalities (identical coef maps): does a imply b?
// A larger constant is a tighter bound; at equal constants strict
// implies non strict.
bool subsumes(const LinCon& a, const LinCon& b) {
  if (a.e.k > b.e.k) return true;
  if (a.e.k < b.e.k) return false;
  return a.rel == Rel::Lt0 || b.rel == Rel::Le0;
}

// Canonicalize, drop trivially true members and parallel inequalities
// implied by a tighter one. Keeps elimination output compact.
void normalize_set(std::vector<LinCon>& cs) {
  for (auto& c : cs) c = canonical(std::move(c));
  std::vector<LinCon> out;
  for (auto& c : cs) {
    if (is_trivially_true(c)) continue;
    bool drop = false;
    for (auto it = out.begin(); it != out.end();) {
      bool ineqs = c.rel != Rel::Eq0 && it->rel != Rel::Eq0;
      if (ineqs && !c.e.coef.empty() && it->e.coef == c.e.coef) {
        if (subsumes(*it, c)) {
          drop = true;
          break;
        }
        if (subsumes(c, *it)) {
          it = out.erase(it);
          continue;
        }
      } else if (*it == c) {
        drop = true;
        break;
      }
      ++it;
    }
    if (!drop) out.push_back(std::move(c));
  }
  cs = std::move(out);
}

LinCon subst_con(const LinCon& c, const std::string& v, const LinExpr& repl) {
  Rat cv = c.e.coef_of(v);
  if (cv == Rat(0)) return c;
  LinCon r = c;
  r.e.coef.erase(v);
  LinExpr add = repl;
  add.scale(cv);
  r.e += add;
  return r;
}

// Removes every occurrence of v. An equality mentioning v acts as a
// substitution, otherwise lower and upper bounds combine pairwise
// (Fourier-Motzkin); both directions are exact over the rationals.
std::vector<LinCon> eliminate_var(std::vector<LinCon> cs, const std::string& v) {
  for (size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].rel != Rel::Eq0) continue;
    Rat cv = cs[i].e.coef_of(v);
    if (cv == Rat(0)) continue;
    LinExpr repl = cs[i].e;
    repl.coef.erase(v);
    repl.scale(Rat(-1) / cv);
    std::vector<LinCon> out;
    for (size_t j = 0; j < cs.size(); ++j) {
      if (j != i) out.push_back(subst_con(cs[j], v, repl));
    }
    return out;
  }
  std::vector<LinCon> lows, ups, rest;
  for (auto& c : cs) {
    Rat cv = c.e.coef_of(v);
    if (cv == Rat(0)) {
      rest.push_back(std::move(c));
    } else if (cv < Rat(0)) {
      lows.push_back(std::move(c));
    } else {
      ups.push_back(std::move(c));
    }
  }
  for (const auto& lo : lows) {
    for (const auto& up : ups) {
      Rat cl = lo.e.coef_of(v);
      Rat cu = up.e.coef_of(v);
      // cu*lo - cl*up scales both by positive factors and cancels v.
      LinExpr e = lo.e;
      e.scale(cu);
      LinExpr t = up.e;
      t.scale(cl);
      e -= t;
      e.coef.erase(v);
      Rel r = (lo.rel == Rel::Lt0 || up.rel == Rel::Lt0) ? Rel::Lt0 : Rel::Le0;
      rest.push_back({std::move(e), r});
    }
  }
  return rest;
}

// Prefers a variable with an equality (cheap substitution), then the one
// minimizing the Fourier-Motzkin product. Empty result: no variable left
// that pred admits.
template <typename Pred>
std::string pick_var(const std::vector<LinCon>& cs, Pred pred) {
  for (const auto& c : cs) {
    if (c.rel != Rel::Eq0) continue;
    for (const auto& [v, cf] : c.e.coef) {
      if (pred(v)) return v;
    }
  }
  std::map<std::string, std::pair<long, long>> cnt;
  for (const auto& c : cs) {
    for (const auto& [v, cf] : c.e.coef) {
      if (!pred(v)) continue;
      if (cf < Rat(0)) {
        cnt[v].first++;
      } else {
        cnt[v].second++;
      }
    }
  }
  std::string best;
  long best_cost = 0;
  for (const auto& [v, lc] : cnt) {
    long cost = lc.first * lc.second;
    if (best.empty() || cost < best_cost) {
      best = v;
      best_cost = cost;
    }
  }
  return best;
}

bool run_satisfiable(std::vector<LinCon> cs) {
  normalize_set(cs);
  while (true) {
    for (const auto& c : cs) {
      if (is_trivially_false(c)) return false;
    }
    std::string v = pick_var(cs, [](const std::string&) { return true; });
    if (v.empty()) return true;
    cs = eliminate_var(std::move(cs), v);
    normalize_set(cs);
  }
}

}  // namespace

void LinCS::add(LinCon c) {
  cons_.push_back(canonical(std::move(c)));
  normalize_set(cons_);
}

void LinCS::conjoin(const LinCS& o) {
  for (const auto& c : o.cons_) cons_.push_back(c);
  normalize_set(cons_);
}

bool LinCS::satisfiable() const { return run_satisfiable(cons_); }

bool LinCS::entails(const LinCon& c) const {
  auto refutes = [this](LinExpr e, Rel r) {
    std::vector<LinCon> cs = cons_;
    cs.push_back({std::move(e), r});
    return !run_satisfiable(std::move(cs));
  };
  LinExpr neg = c.e;
  neg.scale(Rat(-1));
  switch (c.rel) {
    case Rel::Le0:
      return refutes(neg, Rel::Lt0);
    case Rel::Lt0:
      return refutes(neg, Rel::Le0);
    case Rel::Eq0:
      return refutes(c.e, Rel::Lt0) && refutes(neg, Rel::Lt0);
  }
  return false;
}

LinCS LinCS::project(const std::set<std::string>& keep) const {
  std::vector<LinCon> cs = cons_;
  normalize_set(cs);
  while (true) {
    std::string v =
        pick_var(cs, [&keep](const std::string& n) { return keep.count(n) == 0; });
    if (v.empty()) break;
    cs = eliminate_var(std::move(cs), v);
    normalize_set(cs);
  }
  LinCS r;
  r.cons_ = std::move(cs);
  return r;
}

LinCS LinCS::renamed(const std::map<std::string, std::string>& m) const {
  LinCS r;
  for (const auto& c : cons_) {
    LinExpr e = LinExpr::cst(c.e.k);
    for (const auto& [v, cf] : c.e.coef) {
      auto it = m.find(v);
      LinExpr t = LinExpr::var(it == m.end() ? v : it->second);
      t.scale(cf);
      e += t;
    }
    r.cons_.push_back({std::move(e), c.rel});
  }
  normalize_set(r.cons_);
  return r;
}

std::set<std::string> LinCS::vars() const {
  std::set<std::string> out;
  for (const auto& c : cons_) {
    for (const auto& [v, cf] : c.e.coef) out.insert(v);
  }
  return out;
}

std::string LinCS::str() const {
  if (cons_.empty()) return "true";
  std::string out;
  for (size_t i = 0; i < cons_.size(); ++i) {
    if (i) out += ", ";
    out += con_to_string(cons_[i]);
  }
  return out;
}

}  // namespace specpl
