#include "specpl/spec_lang.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace specpl {

namespace {

std::string strip_comments(const std::string& text) {
  std::string out;
  bool comment = false;
  for (char c : text) {
    if (c == '%') comment = true;
    if (c == '\n') comment = false;
    out.push_back(comment ? ' ' : c);
  }
  return out;
}

struct Scan {
  const std::string& s;
  size_t i = 0;

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eof() {
    ws();
    return i >= s.size();
  }
  char peek() {
    ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  std::string ident() {
    ws();
    size_t b = i;
    while (i < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    if (b == i) throw SpecError("expected a name near '" + s.substr(i, 12) + "'");
    return s.substr(b, i - b);
  }
  // body of a (...) group, parens balanced
  std::string group() {
    ws();
    if (peek() != '(') throw SpecError("expected '(' near '" + s.substr(i, 12) + "'");
    ++i;
    size_t b = i;
    int depth = 1;
    while (i < s.size()) {
      if (s[i] == '(') ++depth;
      if (s[i] == ')' && --depth == 0) return s.substr(b, i++ - b);
      ++i;
    }
    throw SpecError("unbalanced parentheses in a specification field");
  }
};

std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

SpecAnnot parse_annot(Scan& sc) {
  std::string id = sc.ident();
  if (id == "gr") return {kModeGr, ty_any()};
  if (id == "var") return {kModeVar, ty_any()};
  if (id == "any") return {kModeAny, ty_any()};
  if (id == "ngv") return {kModeNgv, ty_any()};
  if (id == "novar") return {kModeNovar, ty_any()};
  if (id == "gv") return {kModeGv, ty_any()};
  if (id == "int") return {kModeGr, ty_int()};
  if (id == "atom") return {kModeGr, ty_atom()};
  if (id == "list") {
    if (sc.peek() != '(') throw SpecError("list type needs an element, e.g. list(gr)");
    ++sc.i;
    SpecAnnot e = parse_annot(sc);
    if (sc.peek() != ')') throw SpecError("expected ')' after list element type");
    ++sc.i;
    // the spine of a typed list is instantiated, only the elements may vary
    int mo = e.mo == kModeGr ? kModeGr : kModeNovar;
    return {mo, ty_list(e.ty)};
  }
  throw SpecError("unknown mode/type token '" + id + "'");
}

SpecAnnot parse_annot_str(const std::string& s) {
  Scan sc{s};
  SpecAnnot a = parse_annot(sc);
  if (!sc.eof()) throw SpecError("trailing input after type '" + s + "'");
  return a;
}

enum class Field { Srel, Sol };

// linear expression over size variables: sum of INT, VAR and INT*VAR terms
LinExpr parse_lin_expr(Scan& sc, Field f, const FormalSpec& spec) {
  auto size_var = [&](const std::string& name) -> std::string {
    if (f == Field::Sol && name == "sol") return name;
    for (const auto& a : spec.in_args) {
      if (name == a.name + "_in") return name;
      if (f == Field::Srel && name == a.name + "_out") return name;
    }
    throw SpecError("size variable '" + name + "' does not name a declared argument of '" +
                    spec.pred + "'" + (f == Field::Sol ? " (sol ranges over input sizes)" : ""));
  };
  LinExpr e;
  bool first = true;
  for (;;) {
    sc.ws();
    Rat sign(1);
    char c = sc.peek();
    if (c == '+' || c == '-') {
      ++sc.i;
      if (c == '-') sign = Rat(-1);
    } else if (!first) {
      break;
    }
    sc.ws();
    c = sc.peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t b = sc.i;
      while (sc.i < sc.s.size() && std::isdigit(static_cast<unsigned char>(sc.s[sc.i]))) ++sc.i;
      Rat v(BigInt(sc.s.substr(b, sc.i - b)));
      if (sc.peek() == '*') {
        ++sc.i;
        e = e + LinExpr::var(size_var(sc.ident())).scale(sign * v);
      } else {
        e = e + LinExpr::cst(sign * v);
      }
    } else if (sc.ident_start(c)) {
      e = e + LinExpr::var(size_var(sc.ident())).scale(sign);
    } else {
      throw SpecError("expected a number or size variable near '" + sc.s.substr(sc.i, 12) + "'");
    }
    first = false;
  }
  return e;
}

void parse_lin_field(const std::string& body, Field f, FormalSpec& spec, LinCS& out) {
  for (const auto& piece : split_top(body)) {
    Scan sc{piece};
    if (sc.eof()) throw SpecError("empty constraint in '" + spec.pred + "'");
    LinExpr lhs = parse_lin_expr(sc, f, spec);
    sc.ws();
    std::string rel;
    while (sc.i < sc.s.size() && (sc.s[sc.i] == '=' || sc.s[sc.i] == '<' || sc.s[sc.i] == '>'))
      rel.push_back(sc.s[sc.i++]);
    LinExpr rhs = parse_lin_expr(sc, f, spec);
    if (!sc.eof()) throw SpecError("trailing input after constraint '" + piece + "'");
    if (rel == "=")
      out.add(con_eq(lhs, rhs));
    else if (rel == "=<")
      out.add(con_le(lhs, rhs));
    else if (rel == "<")
      out.add(con_lt(lhs, rhs));
    else if (rel == ">=")
      out.add(con_le(rhs, lhs));
    else if (rel == ">")
      out.add(con_lt(rhs, lhs));
    else
      throw SpecError("expected a relation (=, =<, <, >=, >) in '" + piece + "'");
  }
}

void finish_block(FormalSpec& spec, const std::map<std::string, std::vector<std::string>>& raw,
                  std::vector<FormalSpec>& out) {
  auto it = raw.find("in");
  if (it == raw.end()) throw SpecError("spec '" + spec.pred + "' is missing in(...)");
  for (const auto& body : it->second) {
    for (const auto& piece : split_top(body)) {
      Scan sc{piece};
      std::string name = sc.ident();
      if (!std::isupper(static_cast<unsigned char>(name[0])))
        throw SpecError("argument name '" + name + "' must start with an uppercase letter");
      if (sc.peek() != ':') throw SpecError("expected ':' after argument '" + name + "'");
      ++sc.i;
      SpecAnnot a = parse_annot(sc);
      if (!sc.eof()) throw SpecError("trailing input after argument '" + name + "'");
      for (const auto& prev : spec.in_args)
        if (prev.name == name)
          throw SpecError("duplicate argument name '" + name + "' in '" + spec.pred + "'");
      spec.in_args.push_back({name, a});
    }
  }
  it = raw.find("out");
  if (it != raw.end()) {
    if (it->second.size() > 1) throw SpecError("spec '" + spec.pred + "' has several out(...)");
    auto pieces = split_top(it->second[0]);
    if (static_cast<int>(pieces.size()) != spec.arity())
      throw SpecError("out(...) of '" + spec.pred + "' lists " + std::to_string(pieces.size()) +
                      " arguments, expected " + std::to_string(spec.arity()));
    for (const auto& piece : pieces) {
      Scan sc{piece};
      if (sc.peek() == '_') {
        ++sc.i;
        if (!sc.eof()) throw SpecError("trailing input after '_' in out(...)");
        spec.out_args.push_back(std::nullopt);
      } else {
        spec.out_args.push_back(parse_annot_str(piece));
      }
    }
  } else {
    spec.out_args.assign(spec.arity(), std::nullopt);
  }
  it = raw.find("srel");
  if (it != raw.end())
    for (const auto& body : it->second) parse_lin_field(body, Field::Srel, spec, spec.srel);
  it = raw.find("sol");
  if (it == raw.end()) throw SpecError("spec '" + spec.pred + "' is missing sol(...)");
  for (const auto& body : it->second) parse_lin_field(body, Field::Sol, spec, spec.sol);
  it = raw.find("sexpr");
  if (it != raw.end()) {
    if (it->second.size() > 1) throw SpecError("spec '" + spec.pred + "' has several sexpr(...)");
    Scan sc{it->second[0]};
    std::string name = sc.ident();
    if (!sc.eof()) throw SpecError("sexpr(...) takes a single argument name");
    bool known = false;
    for (const auto& a : spec.in_args) known = known || a.name == name;
    if (!known)
      throw SpecError("sexpr argument '" + name + "' is not declared in '" + spec.pred + "'");
    spec.sexpr = name;
  }
  out.push_back(std::move(spec));
}

std::string rat_str(const Rat& r) {
  std::string s = r.numerator().str();
  if (r.denominator() != 1) s += "/" + r.denominator().str();
  return s;
}

std::string con_str(const LinCon& c) {
  // move negative terms to the right so no side needs a unary minus
  std::string lhs, rhs;
  auto put = [](std::string& side, const std::string& term) {
    if (!side.empty()) side += "+";
    side += term;
  };
  for (const auto& [v, cf] : c.e.coef) {
    if (cf == Rat(0)) continue;
    Rat a = cf > Rat(0) ? cf : -cf;
    put(cf > Rat(0) ? lhs : rhs, a == Rat(1) ? v : rat_str(a) + "*" + v);
  }
  if (c.e.k != Rat(0)) put(c.e.k > Rat(0) ? lhs : rhs, rat_str(c.e.k > Rat(0) ? c.e.k : -c.e.k));
  if (lhs.empty()) lhs = "0";
  if (rhs.empty()) rhs = "0";
  const char* rel = c.rel == Rel::Eq0 ? " = " : c.rel == Rel::Le0 ? " =< " : " < ";
  return lhs + rel + rhs;
}

std::string lincs_str(const LinCS& e) {
  std::string s;
  for (const auto& c : e.constraints()) {
    if (!s.empty()) s += ", ";
    s += con_str(c);
  }
  return s;
}

std::string annot_str(const SpecAnnot& a) {
  switch (a.ty->kind) {
    case TypeExpr::Kind::Int:
      return "int";
    case TypeExpr::Kind::Atom:
      return "atom";
    case TypeExpr::Kind::List:
      return "list(" +
             annot_str({a.mo == kModeGr ? kModeGr : kModeAny, a.ty->elem}) + ")";
    default:
      return mode_to_string(a.mo);
  }
}

}  // namespace

std::vector<FormalSpec> parse_specs(const std::string& text) {
  std::string clean = strip_comments(text);
  Scan sc{clean};
  std::vector<FormalSpec> out;
  bool open = false;
  FormalSpec cur;
  std::map<std::string, std::vector<std::string>> raw;
  while (!sc.eof()) {
    if (!sc.ident_start(sc.peek()))
      throw SpecError("expected a predicate name near '" + clean.substr(sc.i, 12) + "'");
    std::string id = sc.ident();
    bool field = (id == "in" || id == "out" || id == "srel" || id == "sol" || id == "sexpr") &&
                 sc.peek() == '(';
    if (field) {
      if (!open) throw SpecError("field '" + id + "' appears before any predicate name");
      raw[id].push_back(sc.group());
    } else {
      if (open) finish_block(cur, raw, out);
      cur = FormalSpec{};
      cur.pred = id;
      raw.clear();
      open = true;
    }
  }
  if (open) finish_block(cur, raw, out);
  return out;
}

std::string spec_to_string(const FormalSpec& s) {
  std::ostringstream os;
  os << s.pred << "\n  in(";
  for (int k = 0; k < s.arity(); ++k) {
    if (k) os << ", ";
    os << s.in_args[k].name << ":" << annot_str(s.in_args[k].a);
  }
  os << ")\n";
  bool any_out = false;
  for (const auto& o : s.out_args) any_out = any_out || o.has_value();
  if (any_out) {
    os << "  out(";
    for (int k = 0; k < s.arity(); ++k) {
      if (k) os << ", ";
      os << (s.out_args[k] ? annot_str(*s.out_args[k]) : "_");
    }
    os << ")\n";
  }
  if (!s.srel.constraints().empty()) os << "  srel(" << lincs_str(s.srel) << ")\n";
  os << "  sol(" << lincs_str(s.sol) << ")\n";
  if (s.sexpr) os << "  sexpr(" << *s.sexpr << ")\n";
  return os.str();
}

AbstractSequence spec_to_abstract_sequence(const FormalSpec& s,
                                           std::vector<std::string>* warnings) {
  int n = s.arity();
  AbstractSubst in;
  for (int k = 0; k < n; ++k) {
    IndexInfo inf;
    inf.mo = s.in_args[k].a.mo;
    inf.ty = s.in_args[k].a.ty;
    inf.nm = norm_for_type(inf.ty);
    int idx = beta_add_index(in, inf);
    in.sv["X" + std::to_string(k + 1)] = idx;
    // a term that is ground or a plain variable has no repeated variables
    if ((inf.mo & ~(kModeGr | kModeVar)) == 0) in.lin.insert(idx);
  }
  // nothing is claimed about sharing between arguments
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) in.ps.insert({i, j});
  normalize_beta(in);

  AbstractSequence B;
  B.beta_in = in;
  B.beta_ref = in;
  for (int k = 0; k < n && !in.bottom; ++k) {
    if (in.at(in.var_index("X" + std::to_string(k + 1))).mo == kModeGr) B.U.insert(k + 1);
  }

  AbstractSubst o = in;
  for (int k = 0; k < n && !o.bottom; ++k) {
    int idx = o.var_index("X" + std::to_string(k + 1));
    IndexInfo& inf = o.info[idx];
    if (inf.mo != kModeGr) {
      // the call may instantiate this argument
      inf.mo = mode_after_binding(inf.mo);
      o.lin.erase(idx);
    }
    if (s.out_args[k]) {
      inf.mo = mode_glb(inf.mo, s.out_args[k]->mo);
      inf.ty = ty_glb(inf.ty, s.out_args[k]->ty);
      Norm nm = norm_for_type(inf.ty);
      if (nm != inf.nm) {
        std::set<std::string> keep = o.eqs.vars();
        keep.erase(o.size_var(idx));
        o.eqs = o.eqs.project(keep);
        inf.nm = nm;
      }
    }
  }
  normalize_beta(o);
  if (o.bottom && !in.bottom && warnings)
    warnings->push_back("spec '" + s.pred + "': in/out combination admits no output");
  B.beta_out = o;

  std::map<std::string, std::string> ren;
  for (int k = 0; k < n; ++k) {
    ren[s.in_args[k].name + "_in"] = "i" + std::to_string(k + 1);
    ren[s.in_args[k].name + "_out"] = "o" + std::to_string(k + 1);
  }
  B.e_ref_out = s.srel.renamed(ren);
  B.e_sol = s.sol.renamed(ren);
  return B;
}

}  // namespace specpl
