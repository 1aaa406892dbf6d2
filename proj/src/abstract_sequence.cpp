#include "specpl/abstract_sequence.hpp"

#include <sstream>

namespace specpl {

namespace {

const LinExpr& sol_var() {
  static LinExpr e = LinExpr::var("sol");
  return e;
}

std::string indent(const std::string& s) {
  std::ostringstream os;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t nl = s.find('\n', pos);
    if (nl == std::string::npos) nl = s.size();
    os << "  " << s.substr(pos, nl - pos) << "\n";
    pos = nl + 1;
  }
  return os.str();
}

}  // namespace

void seq_add_fail(AbstractSequence& b, AbstractSubst beta) {
  if (beta.bottom) return;
  if (b.beta_fails.size() < 4) {
    b.beta_fails.push_back(std::move(beta));
  } else {
    b.beta_fails.back() = beta_lub(b.beta_fails.back(), beta);
  }
}

bool deterministic(const AbstractSequence& b) {
  return b.e_sol.entails(con_le(sol_var(), LinExpr::cst(1)));
}

bool fully_deterministic(const AbstractSequence& b) {
  return b.beta_fails.empty() && beta_equal(b.beta_in, b.beta_ref) &&
         b.e_sol.entails(con_eq(sol_var(), LinExpr::cst(1)));
}

bool surely_succeeds(const AbstractSequence& b) {
  return b.beta_fails.empty() && beta_equal(b.beta_in, b.beta_ref) &&
         b.e_sol.entails(con_ge(sol_var(), LinExpr::cst(1)));
}

bool test_literal(const AbstractSequence& b) {
  if (!deterministic(b)) return false;
  for (int k = 1; k <= static_cast<int>(b.beta_in.sv.size()); ++k) {
    if (!b.U.count(k)) return false;
  }
  return true;
}

bool exclusive(const AbstractSequence& b1, const AbstractSequence& b2) {
  AbstractSubst g = beta_glb(b1.beta_ref, b2.beta_ref);
  if (g.bottom) return true;
  for (const auto& f : b1.beta_fails) {
    if (beta_leq(g, f)) return true;
  }
  for (const auto& f : b2.beta_fails) {
    if (beta_leq(g, f)) return true;
  }
  return false;
}

bool covered_by(const AbstractSequence& computed, const AbstractSequence& spec) {
  if (!beta_leq(computed.beta_out, spec.beta_out)) return false;
  for (const auto& c : spec.e_sol.constraints()) {
    if (!computed.e_sol.entails(c)) return false;
  }
  for (int k : spec.U) {
    if (!computed.U.count(k)) return false;
  }
  for (const auto& c : spec.e_ref_out.constraints()) {
    if (!computed.e_ref_out.entails(c)) return false;
  }
  return true;
}

std::string seq_to_string(const AbstractSequence& b) {
  std::ostringstream os;
  os << "in:\n" << indent(beta_to_string(b.beta_in));
  os << "ref:\n" << indent(beta_to_string(b.beta_ref));
  if (b.beta_fails.empty()) {
    os << "fails: (none)\n";
  } else {
    os << "fails:\n";
    for (const auto& f : b.beta_fails) os << indent(beta_to_string(f));
  }
  os << "U: {";
  bool first = true;
  for (int k : b.U) {
    if (!first) os << ",";
    os << k;
    first = false;
  }
  os << "}\n";
  os << "out:\n" << indent(beta_to_string(b.beta_out));
  os << "srel: " << (b.e_ref_out.empty() ? "(none)" : b.e_ref_out.str()) << "\n";
  os << "sol: " << (b.e_sol.empty() ? "(none)" : b.e_sol.str());
  return os.str();
}

}  // namespace specpl
