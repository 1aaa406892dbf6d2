#include "specpl/printer.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace specpl {

namespace {

struct OpEntry {
  int prec;
  enum { XFX, XFY, YFX } type;
};

const std::map<std::string, OpEntry>& infix_table() {
  static const std::map<std::string, OpEntry> ops = {
      {":-", {1200, OpEntry::XFX}}, {";", {1100, OpEntry::XFY}},
      {",", {1000, OpEntry::XFY}},  {"=", {700, OpEntry::XFX}},
      {"==", {700, OpEntry::XFX}},  {"\\==", {700, OpEntry::XFX}},
      {"<", {700, OpEntry::XFX}},   {"=<", {700, OpEntry::XFX}},
      {">", {700, OpEntry::XFX}},   {">=", {700, OpEntry::XFX}},
      {"is", {700, OpEntry::XFX}},  {"+", {500, OpEntry::YFX}},
      {"-", {500, OpEntry::YFX}},   {"*", {400, OpEntry::YFX}},
      {"//", {400, OpEntry::YFX}},  {"mod", {400, OpEntry::YFX}},
  };
  return ops;
}

void write_term(std::ostream& os, const TermPtr& t, int maxp, const VarRename& rn) {
  switch (t->kind) {
    case TermKind::Var: os << rn(t->name); return;
    case TermKind::Int: os << t->value; return;
    case TermKind::Atom: os << t->name; return;
    case TermKind::Compound: break;
  }
  if (is_cons(t)) {
    os << '[';
    write_term(os, t->args[0], 999, rn);
    TermPtr rest = t->args[1];
    while (is_cons(rest)) {
      os << ',';
      write_term(os, rest->args[0], 999, rn);
      rest = rest->args[1];
    }
    if (!is_nil(rest)) {
      os << '|';
      write_term(os, rest, 999, rn);
    }
    os << ']';
    return;
  }
  auto it = t->args.size() == 2 ? infix_table().find(t->name) : infix_table().end();
  if (it != infix_table().end()) {
    const OpEntry& op = it->second;
    bool paren = op.prec > maxp;
    if (paren) os << '(';
    int lm = op.type == OpEntry::YFX ? op.prec : op.prec - 1;
    int rm = op.type == OpEntry::XFY ? op.prec : op.prec - 1;
    write_term(os, t->args[0], lm, rn);
    bool alpha = std::isalpha((unsigned char)t->name[0]);
    if (t->name == ",") os << ", ";
    else if (alpha) os << ' ' << t->name << ' ';
    else os << t->name;
    // Keep '1- -3' re-parseable: a bare negative literal after a symbolic
    // operator would otherwise fuse into one symbol run.
    const TermPtr& r = t->args[1];
    if (!alpha && t->name != "," && r->kind == TermKind::Int && r->value < 0) os << ' ';
    write_term(os, r, rm, rn);
    if (paren) os << ')';
    return;
  }
  os << t->name << '(';
  for (size_t i = 0; i < t->args.size(); ++i) {
    if (i) os << ',';
    write_term(os, t->args[i], 999, rn);
  }
  os << ')';
}

void write_literal(std::ostream& os, const Literal& l, const VarRename& rn) {
  switch (l.kind) {
    case LitKind::UnifyVarVar:
      os << rn(l.x) << '=' << rn(l.y);
      return;
    case LitKind::UnifyVarFunctor: {
      os << rn(l.x) << '=';
      if (l.fn.is_int) {
        os << l.fn.value;
      } else if (l.fn.arity == 0) {
        os << l.fn.name;
      } else if (l.fn.name == "." && l.fn.arity == 2) {
        os << '[' << rn(l.vargs[0]) << '|' << rn(l.vargs[1]) << ']';
      } else {
        os << l.fn.name << '(';
        for (size_t i = 0; i < l.vargs.size(); ++i) {
          if (i) os << ',';
          os << rn(l.vargs[i]);
        }
        os << ')';
      }
      return;
    }
    case LitKind::Call: {
      if (l.vargs.size() == 2 && infix_table().count(l.pred)) {
        bool alpha = std::isalpha((unsigned char)l.pred[0]);
        os << rn(l.vargs[0]) << (alpha ? " " : "") << l.pred << (alpha ? " " : "")
           << rn(l.vargs[1]);
        return;
      }
      os << l.pred;
      if (!l.vargs.empty()) {
        os << '(';
        for (size_t i = 0; i < l.vargs.size(); ++i) {
          if (i) os << ',';
          os << rn(l.vargs[i]);
        }
        os << ')';
      }
      return;
    }
    case LitKind::Cut: os << '!'; return;
    case LitKind::Negation:
      os << "not(";
      write_literal(os, *l.inner, rn);
      os << ')';
      return;
    case LitKind::General: write_term(os, l.goal, 999, rn); return;
  }
}

void count_term_vars(const TermPtr& t, std::map<std::string, int>& n) {
  if (t->kind == TermKind::Var) {
    ++n[t->name];
    return;
  }
  for (auto& a : t->args) count_term_vars(a, n);
}

void count_literal_vars(const Literal& l, std::map<std::string, int>& n) {
  switch (l.kind) {
    case LitKind::UnifyVarVar: ++n[l.x]; ++n[l.y]; return;
    case LitKind::UnifyVarFunctor:
      ++n[l.x];
      for (auto& v : l.vargs) ++n[v];
      return;
    case LitKind::Call:
      for (auto& v : l.vargs) ++n[v];
      return;
    case LitKind::Cut: return;
    case LitKind::Negation: count_literal_vars(*l.inner, n); return;
    case LitKind::General: count_term_vars(l.goal, n); return;
  }
}

VarRename singleton_rename(const Clause& c) {
  auto counts = std::make_shared<std::map<std::string, int>>();
  for (auto& a : c.head_args) count_term_vars(a, *counts);
  for (auto& l : c.body) count_literal_vars(l, *counts);
  return [counts](const std::string& v) -> std::string {
    auto it = counts->find(v);
    if (it != counts->end() && it->second == 1) return "_";
    return v;
  };
}

VarRename identity() {
  return [](const std::string& v) { return v; };
}

} // namespace

std::string term_to_string(const TermPtr& t) { return term_to_string(t, identity()); }

std::string term_to_string(const TermPtr& t, const VarRename& rn) {
  std::ostringstream os;
  write_term(os, t, 1200, rn);
  return os.str();
}

std::string literal_to_string(const Literal& l) { return literal_to_string(l, identity()); }

std::string literal_to_string(const Literal& l, const VarRename& rn) {
  std::ostringstream os;
  write_literal(os, l, rn);
  return os.str();
}

std::string clause_to_string(const Clause& c, bool anonymize_singletons) {
  VarRename rn = anonymize_singletons ? singleton_rename(c) : identity();
  std::ostringstream os;
  os << c.pred;
  if (!c.head_args.empty()) {
    os << '(';
    for (size_t i = 0; i < c.head_args.size(); ++i) {
      if (i) os << ',';
      write_term(os, c.head_args[i], 999, rn);
    }
    os << ')';
  }
  if (!c.body.empty()) {
    os << " :- ";
    for (size_t i = 0; i < c.body.size(); ++i) {
      if (i) os << ", ";
      write_literal(os, c.body[i], rn);
    }
  }
  os << '.';
  return os.str();
}

std::string procedure_to_string(const Procedure& p, bool anonymize_singletons) {
  std::string out;
  for (auto& c : p.clauses) {
    out += clause_to_string(c, anonymize_singletons);
    out += '\n';
  }
  return out;
}

std::string program_to_string(const Program& p, bool anonymize_singletons) {
  std::string out;
  bool first = true;
  for (auto& proc : p.procs) {
    if (!first) out += '\n';
    first = false;
    out += procedure_to_string(proc, anonymize_singletons);
  }
  return out;
}

} // namespace specpl
