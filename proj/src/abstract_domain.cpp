#include "specpl/abstract_domain.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace specpl {

int mode_fix(int m) { return m == 6 ? kModeAny : m; }

int mode_lub(int a, int b) { return mode_fix(a | b); }

int mode_glb(int a, int b) { return a & b; }

int unify_mode(int a, int b) {
  // Result class of unifying a term of the row class with one of the
  // column class, per primitive pair: gr, var, ngv.
  static const int prim[3][3] = {
      {kModeGr, kModeGr, kModeGr},
      {kModeGr, kModeVar, kModeNgv},
      {kModeGr, kModeNgv, kModeNovar},
  };
  int out = 0;
  for (int i = 0; i < 3; ++i) {
    if (!(a & (1 << i))) continue;
    for (int j = 0; j < 3; ++j) {
      if (!(b & (1 << j))) continue;
      out |= prim[i][j];
    }
  }
  return mode_fix(out);
}

int mode_after_binding(int m) {
  int out = 0;
  if (m & kModeGr) out |= kModeGr;
  if (m & kModeVar) out |= kModeAny;
  if (m & kModeNgv) out |= kModeNovar;
  return mode_fix(out);
}

int term_mode(const TermPtr& t) {
  if (t->kind == TermKind::Var) return kModeVar;
  return term_is_ground(t) ? kModeGr : kModeNgv;
}

std::string mode_to_string(int m) {
  switch (m) {
    case kModeNone:
      return "none";
    case kModeGr:
      return "gr";
    case kModeVar:
      return "var";
    case kModeGv:
      return "gv";
    case kModeNgv:
      return "ngv";
    case kModeNovar:
      return "novar";
    default:
      return "any";
  }
}

namespace {

TypePtr mk_type(TypeExpr::Kind k, TypePtr elem = nullptr) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = k;
  t->elem = std::move(elem);
  return t;
}

TypePtr nz(const TypePtr& t) { return t ? t : ty_any(); }

}  // namespace

TypePtr ty_bot() {
  static TypePtr t = mk_type(TypeExpr::Bot);
  return t;
}
TypePtr ty_any() {
  static TypePtr t = mk_type(TypeExpr::Any);
  return t;
}
TypePtr ty_int() {
  static TypePtr t = mk_type(TypeExpr::Int);
  return t;
}
TypePtr ty_atom() {
  static TypePtr t = mk_type(TypeExpr::Atom);
  return t;
}
TypePtr ty_list(TypePtr elem) { return mk_type(TypeExpr::List, nz(elem)); }

bool ty_is_bot(const TypePtr& t) { return t && t->kind == TypeExpr::Bot; }
bool ty_is_any(const TypePtr& t) { return !t || t->kind == TypeExpr::Any; }

bool ty_is_ground(const TypePtr& t0) {
  TypePtr t = nz(t0);
  switch (t->kind) {
    case TypeExpr::Bot:
    case TypeExpr::Int:
    case TypeExpr::Atom:
      return true;
    case TypeExpr::List:
      return ty_is_ground(t->elem);
    case TypeExpr::Any:
      return false;
  }
  return false;
}

bool ty_leq(const TypePtr& a0, const TypePtr& b0) {
  TypePtr a = nz(a0), b = nz(b0);
  if (a->kind == TypeExpr::Bot) return true;
  if (b->kind == TypeExpr::Any) return true;
  if (a->kind == TypeExpr::Any || b->kind == TypeExpr::Bot) return false;
  if (a->kind == TypeExpr::Int) return b->kind == TypeExpr::Int;
  if (a->kind == TypeExpr::Atom) return b->kind == TypeExpr::Atom;
  // a is a list type; list(bot) = {[]} also sits below atom
  if (b->kind == TypeExpr::List) return ty_leq(a->elem, b->elem);
  if (b->kind == TypeExpr::Atom) return ty_is_bot(a->elem);
  return false;
}

bool ty_equal(const TypePtr& a, const TypePtr& b) { return ty_leq(a, b) && ty_leq(b, a); }

TypePtr ty_glb(const TypePtr& a0, const TypePtr& b0) {
  TypePtr a = nz(a0), b = nz(b0);
  if (a->kind == TypeExpr::Bot || b->kind == TypeExpr::Bot) return ty_bot();
  if (a->kind == TypeExpr::Any) return b;
  if (b->kind == TypeExpr::Any) return a;
  if (a->kind == b->kind) {
    if (a->kind == TypeExpr::List) return ty_list(ty_glb(a->elem, b->elem));
    return a;
  }
  // atom meets list in {[]}
  if ((a->kind == TypeExpr::Atom && b->kind == TypeExpr::List) ||
      (a->kind == TypeExpr::List && b->kind == TypeExpr::Atom)) {
    return ty_list(ty_bot());
  }
  return ty_bot();
}

TypePtr ty_lub(const TypePtr& a0, const TypePtr& b0) {
  TypePtr a = nz(a0), b = nz(b0);
  if (a->kind == TypeExpr::Any || b->kind == TypeExpr::Any) return ty_any();
  if (a->kind == TypeExpr::Bot) return b;
  if (b->kind == TypeExpr::Bot) return a;
  if (a->kind == b->kind) {
    if (a->kind == TypeExpr::List) return ty_list(ty_lub(a->elem, b->elem));
    return a;
  }
  if (a->kind == TypeExpr::Atom && b->kind == TypeExpr::List && ty_is_bot(b->elem)) return a;
  if (b->kind == TypeExpr::Atom && a->kind == TypeExpr::List && ty_is_bot(a->elem)) return b;
  return ty_any();
}

bool term_has_type(const TermPtr& t, const TypePtr& ty0) {
  TypePtr ty = nz(ty0);
  switch (ty->kind) {
    case TypeExpr::Bot:
      return false;
    case TypeExpr::Any:
      return true;
    case TypeExpr::Int:
      return t->kind == TermKind::Int;
    case TypeExpr::Atom:
      return t->kind == TermKind::Atom;
    case TypeExpr::List: {
      TermPtr cur = t;
      while (is_cons(cur)) {
        if (!term_has_type(cur->args[0], ty->elem)) return false;
        cur = cur->args[1];
      }
      return is_nil(cur);
    }
  }
  return false;
}

std::string ty_to_string(const TypePtr& t0) {
  TypePtr t = nz(t0);
  switch (t->kind) {
    case TypeExpr::Bot:
      return "bot";
    case TypeExpr::Any:
      return "any";
    case TypeExpr::Int:
      return "int";
    case TypeExpr::Atom:
      return "atom";
    case TypeExpr::List:
      return "list(" + ty_to_string(t->elem) + ")";
  }
  return "any";
}

Norm norm_for_type(const TypePtr& t0) {
  TypePtr t = nz(t0);
  if (t->kind == TypeExpr::List) return Norm::ListLen;
  if (t->kind == TypeExpr::Int) return Norm::IntValue;
  return Norm::TermSize;
}

std::string norm_to_string(Norm n) {
  switch (n) {
    case Norm::TermSize:
      return "size";
    case Norm::ListLen:
      return "len";
    case Norm::IntValue:
      return "val";
  }
  return "size";
}

std::optional<BigInt> term_norm_value(const TermPtr& t, Norm n) {
  switch (n) {
    case Norm::ListLen: {
      auto len = list_length(t);
      if (!len) return std::nullopt;
      return BigInt(*len);
    }
    case Norm::IntValue:
      if (t->kind != TermKind::Int) return std::nullopt;
      return BigInt(t->value);
    case Norm::TermSize: {
      if (t->kind == TermKind::Var) return BigInt(0);
      if (t->kind != TermKind::Compound) return BigInt(1);
      BigInt s(1);
      for (const auto& a : t->args) {
        auto v = term_norm_value(a, Norm::TermSize);
        s += *v;
      }
      return s;
    }
  }
  return std::nullopt;
}

int AbstractSubst::find(int i) const {
  while (parent[i] != i) i = parent[i];
  return i;
}

int AbstractSubst::var_index(const std::string& v) const {
  auto it = sv.find(v);
  return it == sv.end() ? -1 : find(it->second);
}

bool AbstractSubst::shares(int i, int j) const {
  i = find(i);
  j = find(j);
  if (i == j) return (info[i].mo & (kModeVar | kModeNgv)) != 0;
  return ps.count({std::min(i, j), std::max(i, j)}) != 0;
}

bool AbstractSubst::is_linear(int i) const {
  i = find(i);
  return lin.count(i) != 0 || (info[i].mo & (kModeVar | kModeNgv)) == 0;
}

const IndexInfo& AbstractSubst::at(int i) const { return info[find(i)]; }

std::string AbstractSubst::size_var(int i) const { return "s" + std::to_string(find(i)); }

AbstractSubst beta_bottom() {
  AbstractSubst b;
  b.bottom = true;
  return b;
}

int beta_add_index(AbstractSubst& b, IndexInfo inf) {
  if (!inf.ty) inf.ty = ty_any();
  int n = static_cast<int>(b.parent.size());
  b.parent.push_back(n);
  b.info.push_back(std::move(inf));
  return n;
}

void beta_bind_var(AbstractSubst& b, const std::string& v, int idx) { b.sv[v] = idx; }

int beta_add_free_var(AbstractSubst& b, const std::string& v) {
  IndexInfo inf;
  inf.mo = kModeVar;
  inf.ty = ty_any();
  inf.nm = Norm::TermSize;
  int idx = beta_add_index(b, inf);
  b.lin.insert(idx);
  b.sv[v] = idx;
  return idx;
}

AbstractSubst beta_all_free(const std::vector<std::string>& vars) {
  AbstractSubst b;
  for (const auto& v : vars) beta_add_free_var(b, v);
  normalize_beta(b);
  return b;
}

namespace {

void rebuild_ps(AbstractSubst& b) {
  std::set<std::pair<int, int>> out;
  for (const auto& [p, q] : b.ps) {
    int a = b.find(p), c = b.find(q);
    if (a == c) continue;
    out.insert({std::min(a, c), std::max(a, c)});
  }
  b.ps = std::move(out);
}

void add_ps(AbstractSubst& b, int i, int j) {
  i = b.find(i);
  j = b.find(j);
  if (i == j) return;
  b.ps.insert({std::min(i, j), std::max(i, j)});
}

std::set<int> ps_partners(const AbstractSubst& b, int i) {
  i = b.find(i);
  std::set<int> out;
  for (const auto& [p, q] : b.ps) {
    int a = b.find(p), c = b.find(q);
    if (a == i && c != i) out.insert(c);
    if (c == i && a != i) out.insert(a);
  }
  return out;
}

void drop_size_var(AbstractSubst& b, int root) {
  auto keep = b.eqs.vars();
  if (keep.erase(b.size_var(root)) > 0) {
    b.eqs = b.eqs.project(keep);
  }
}

bool add_size_fact(LinCS& e, const LinCon& c) {
  std::string before = e.str();
  e.add(c);
  return e.str() != before;
}

bool is_cons_fn(const FunctorSym& fn) {
  return !fn.is_int && fn.name == "." && fn.arity == 2;
}

bool is_nil_fn(const FunctorSym& fn) {
  return !fn.is_int && fn.name == "[]" && fn.arity == 0;
}

// Natural order on variable names so X10 sorts after X2.
bool natural_less(const std::string& a, const std::string& b) {
  size_t i = a.size(), j = b.size();
  while (i > 0 && isdigit(static_cast<unsigned char>(a[i - 1]))) --i;
  while (j > 0 && isdigit(static_cast<unsigned char>(b[j - 1]))) --j;
  if (a.compare(0, i, b, 0, j) == 0 && i < a.size() && j < b.size()) {
    long long na = std::stoll(a.substr(i));
    long long nb = std::stoll(b.substr(j));
    if (na != nb) return na < nb;
  }
  return a < b;
}

}  // namespace

void normalize_beta(AbstractSubst& b) {
  if (b.bottom) return;
  bool changed = true;
  int guard = 0;
  while (changed && !b.bottom && ++guard < 64) {
    changed = false;
    rebuild_ps(b);

    auto set_mode = [&](int r, int m) {
      m = mode_fix(m);
      if (b.info[r].mo != m) {
        b.info[r].mo = m;
        changed = true;
      }
    };
    auto meet_type = [&](int r, const TypePtr& t) {
      TypePtr g = ty_glb(b.info[r].ty, t);
      if (!ty_equal(g, b.info[r].ty)) {
        b.info[r].ty = g;
        changed = true;
      }
    };

    for (int i = 0; i < static_cast<int>(b.parent.size()) && !b.bottom; ++i) {
      if (b.find(i) != i) continue;
      if (!b.info[i].ty) b.info[i].ty = ty_any();

      if (b.info[i].frm) {
        set_mode(i, b.info[i].mo & kModeNovar);
        Frame f = *b.info[i].frm;

        // frame versus type agreement
        if (f.fn.is_int) {
          meet_type(i, ty_int());
        } else if (is_nil_fn(f.fn)) {
          meet_type(i, ty_list(ty_bot()));
        } else if (f.fn.arity == 0) {
          if (b.info[i].ty->kind == TypeExpr::List) {
            b.bottom = true;
            break;
          }
          meet_type(i, ty_atom());
        } else if (is_cons_fn(f.fn)) {
          auto k = b.info[i].ty->kind;
          if (k == TypeExpr::Int || k == TypeExpr::Atom ||
              (k == TypeExpr::List && ty_is_bot(b.info[i].ty->elem))) {
            b.bottom = true;
            break;
          }
        } else {
          auto k = b.info[i].ty->kind;
          if (k == TypeExpr::Int || k == TypeExpr::Atom || k == TypeExpr::List) {
            b.bottom = true;
            break;
          }
        }

        // mode through the frame, both directions
        int derived;
        if (f.fn.arity == 0) {
          derived = kModeGr;
        } else {
          bool can_gr = true, can_ngv = false;
          for (int kid : f.kids) {
            int m = b.at(kid).mo;
            if (!(m & kModeGr)) can_gr = false;
            if (m & (kModeVar | kModeNgv)) can_ngv = true;
          }
          derived = (can_gr ? kModeGr : 0) | (can_ngv ? kModeNgv : 0);
        }
        set_mode(i, b.info[i].mo & derived);
        if (b.info[i].mo == kModeGr) {
          for (int kid : f.kids) {
            int r = b.find(kid);
            set_mode(r, b.info[r].mo & kModeGr);
          }
        } else if ((b.info[i].mo & kModeGr) == 0 && f.fn.arity > 0) {
          // surely nonground with a single candidate carrier kid
          std::set<int> cands;
          for (int kid : f.kids) {
            int r = b.find(kid);
            if (b.info[r].mo & (kModeVar | kModeNgv)) cands.insert(r);
          }
          if (cands.size() == 1) {
            int r = *cands.begin();
            int m = b.info[r].mo & (kModeVar | kModeNgv);
            if (m == kModeVar || m == kModeNgv) set_mode(r, m);
          }
        }

        // type through a cons frame, both directions
        if (is_cons_fn(f.fn)) {
          int h = b.find(f.kids[0]), t = b.find(f.kids[1]);
          if (b.info[i].ty->kind == TypeExpr::List) {
            meet_type(h, b.info[i].ty->elem);
            meet_type(t, ty_list(b.info[i].ty->elem));
          }
          if (b.info[t].ty && b.info[t].ty->kind == TypeExpr::List) {
            meet_type(i, ty_list(ty_lub(b.info[h].ty, b.info[t].ty->elem)));
          }
        }

        // a kid that surely does not share with its parent is ground
        std::set<int> kidroots;
        for (int kid : f.kids) kidroots.insert(b.find(kid));
        for (int r : kidroots) {
          if (r != i && (b.info[r].mo & (kModeVar | kModeNgv)) && !b.shares(i, r)) {
            set_mode(r, b.info[r].mo & kModeGr);
          }
        }

        // linearity through the frame
        if (b.lin.count(i)) {
          for (int r : kidroots) {
            if (!b.lin.count(r)) {
              b.lin.insert(r);
              changed = true;
            }
          }
          std::map<int, int> occ;
          for (int kid : f.kids) occ[b.find(kid)]++;
          for (const auto& [r, n] : occ) {
            if (n > 1 && r != i) set_mode(r, b.info[r].mo & kModeGr);
          }
          for (int r1 : kidroots) {
            for (int r2 : kidroots) {
              if (r1 < r2 && b.ps.count({r1, r2})) {
                b.ps.erase({r1, r2});
                changed = true;
              }
            }
          }
        } else {
          bool linear = true;
          std::map<int, int> occ;
          for (int kid : f.kids) occ[b.find(kid)]++;
          for (const auto& [r, n] : occ) {
            if (!b.is_linear(r)) linear = false;
            if (n > 1 && (b.info[r].mo & (kModeVar | kModeNgv))) linear = false;
          }
          for (int r1 : kidroots) {
            for (int r2 : kidroots) {
              if (r1 < r2 && b.shares(r1, r2)) linear = false;
            }
          }
          if (linear) {
            b.lin.insert(i);
            changed = true;
          }
        }
      }
      if (b.bottom) break;

      // mode allowed by the type
      int allowed = kModeAny;
      switch (b.info[i].ty->kind) {
        case TypeExpr::Bot:
          b.bottom = true;
          break;
        case TypeExpr::Int:
        case TypeExpr::Atom:
          allowed = kModeGr;
          break;
        case TypeExpr::List:
          allowed = ty_is_ground(b.info[i].ty) ? kModeGr : kModeNovar;
          break;
        case TypeExpr::Any:
          break;
      }
      if (b.bottom) break;
      set_mode(i, b.info[i].mo & allowed);
      if (b.info[i].mo == kModeNone) {
        b.bottom = true;
        break;
      }

      // norm follows the type; stale measures leave eqs
      Norm want = norm_for_type(b.info[i].ty);
      if (b.info[i].nm != want) {
        drop_size_var(b, i);
        b.info[i].nm = want;
        changed = true;
      }

      // base size facts
      LinExpr si = LinExpr::var(b.size_var(i));
      if (b.info[i].nm != Norm::IntValue) {
        changed |= add_size_fact(b.eqs, con_ge(si, LinExpr::cst(0)));
      }
      if (b.info[i].nm == Norm::ListLen && b.info[i].ty->kind == TypeExpr::List &&
          ty_is_bot(b.info[i].ty->elem)) {
        changed |= add_size_fact(b.eqs, con_eq(si, LinExpr::cst(0)));
      }
      if (b.info[i].nm == Norm::TermSize && b.info[i].ty->kind == TypeExpr::Atom) {
        changed |= add_size_fact(b.eqs, con_eq(si, LinExpr::cst(1)));
      }
      if (b.info[i].frm) {
        const Frame& f = *b.info[i].frm;
        if (b.info[i].nm == Norm::IntValue && f.fn.is_int) {
          changed |= add_size_fact(b.eqs, con_eq(si, LinExpr::cst(f.fn.value)));
        }
        if (b.info[i].nm == Norm::ListLen && is_nil_fn(f.fn)) {
          changed |= add_size_fact(b.eqs, con_eq(si, LinExpr::cst(0)));
        }
        if (b.info[i].nm == Norm::ListLen && is_cons_fn(f.fn) &&
            b.at(f.kids[1]).nm == Norm::ListLen) {
          LinExpr st = LinExpr::var(b.size_var(f.kids[1]));
          changed |= add_size_fact(b.eqs, con_eq(si, st + LinExpr::cst(1)));
        }
        if (b.info[i].nm == Norm::TermSize && f.fn.arity > 0) {
          bool all_sz = true;
          for (int kid : f.kids) {
            if (b.at(kid).nm != Norm::TermSize) all_sz = false;
          }
          if (all_sz) {
            LinExpr sum = LinExpr::cst(1);
            for (int kid : f.kids) sum += LinExpr::var(b.size_var(kid));
            changed |= add_size_fact(b.eqs, con_eq(si, sum));
          }
        }
      }

      if ((b.info[i].mo & (kModeVar | kModeNgv)) == 0 && !b.lin.count(i)) {
        b.lin.insert(i);
        changed = true;
      }
    }
    if (b.bottom) break;

    // sharing needs a nonground member on both ends
    std::vector<std::pair<int, int>> dead;
    for (const auto& pr : b.ps) {
      if ((b.info[pr.first].mo & (kModeVar | kModeNgv)) == 0 ||
          (b.info[pr.second].mo & (kModeVar | kModeNgv)) == 0) {
        dead.push_back(pr);
      }
    }
    for (const auto& pr : dead) {
      b.ps.erase(pr);
      changed = true;
    }

    if (!b.eqs.satisfiable()) b.bottom = true;
  }
  if (b.bottom) {
    AbstractSubst empty = beta_bottom();
    b = empty;
  }
}

AbstractSubst beta_compact(const AbstractSubst& b) {
  if (b.bottom) return beta_bottom();
  std::vector<std::string> names;
  names.reserve(b.sv.size());
  for (const auto& [v, idx] : b.sv) names.push_back(v);
  std::sort(names.begin(), names.end(), natural_less);

  std::map<int, int> remap;
  std::vector<int> order;
  std::vector<int> stack;
  auto visit = [&](int root, auto&& self) -> void {
    if (remap.count(root)) return;
    remap[root] = static_cast<int>(order.size());
    order.push_back(root);
    if (b.info[root].frm) {
      for (int kid : b.info[root].frm->kids) self(b.find(kid), self);
    }
  };
  for (const auto& v : names) visit(b.find(b.sv.at(v)), visit);

  AbstractSubst out;
  for (int old : order) {
    IndexInfo inf = b.info[old];
    if (inf.frm) {
      Frame f = *inf.frm;
      for (int& kid : f.kids) kid = remap.at(b.find(kid));
      inf.frm = f;
    }
    beta_add_index(out, inf);
  }
  for (const auto& v : names) out.sv[v] = remap.at(b.find(b.sv.at(v)));
  for (const auto& [p, q] : b.ps) {
    auto ip = remap.find(b.find(p));
    auto iq = remap.find(b.find(q));
    if (ip == remap.end() || iq == remap.end() || ip->second == iq->second) continue;
    out.ps.insert({std::min(ip->second, iq->second), std::max(ip->second, iq->second)});
  }
  for (int l : b.lin) {
    auto it = remap.find(b.find(l));
    if (it != remap.end()) out.lin.insert(it->second);
  }
  std::set<std::string> keep;
  std::map<std::string, std::string> ren;
  for (int old : order) {
    keep.insert("s" + std::to_string(old));
    ren["s" + std::to_string(old)] = "s" + std::to_string(remap.at(old));
  }
  out.eqs = b.eqs.project(keep).renamed(ren);
  return out;
}

namespace {

// Congruence closure driver for abstract unification. Processes pairs of
// classes; each merge applies the instantiation side effects (sharing
// closure, linearity loss, stale size removal) before joining the slots.
struct Unifier {
  AbstractSubst b;
  bool fail = false;
  std::set<int> touched_slots;
  std::deque<std::pair<int, int>> work;

  void mark(int r) {
    if (b.info[r].mo & (kModeVar | kModeNgv)) touched_slots.insert(r);
  }

  void weaken_partner(int z, bool keep_lin) {
    IndexInfo& zi = b.info[z];
    if ((zi.mo & (kModeVar | kModeNgv)) == 0) return;
    mark(z);
    zi.mo = mode_after_binding(zi.mo);
    if (!keep_lin) b.lin.erase(z);
    if (zi.nm == Norm::TermSize) drop_size_var(b, z);
  }

  void run() {
    while (!work.empty() && !fail) {
      auto [x, y] = work.front();
      work.pop_front();
      step(b.find(x), b.find(y));
    }
  }

  void step(int i, int j) {
    if (i == j) return;
    IndexInfo ii = b.info[i], jj = b.info[j];
    bool sh = b.shares(i, j);
    bool clean_i = ii.mo == kModeVar && !sh;  // i is a var absent from j
    bool clean_j = jj.mo == kModeVar && !sh;
    bool alias = clean_i && clean_j;
    int rmo = unify_mode(ii.mo, jj.mo);
    TypePtr rty = ty_glb(ii.ty, jj.ty);
    Norm rnm = norm_for_type(rty);
    std::set<int> pi = ps_partners(b, i);
    pi.erase(j);
    std::set<int> pj = ps_partners(b, j);
    pj.erase(i);

    if (ii.mo != kModeGr && (alias || !clean_j)) mark(i);
    if (jj.mo != kModeGr && (alias || !clean_i)) mark(j);

    bool lin_i = b.is_linear(i), lin_j = b.is_linear(j);
    if (alias) {
      // Pure aliasing renames a variable: partner sizes, modes and
      // structure stay intact, only linearity across both sides breaks.
      for (int z : pi) {
        mark(z);
        if (pj.count(z)) b.lin.erase(z);
      }
      for (int z : pj) mark(z);
    } else if (clean_i) {
      for (int z : pi) weaken_partner(z, b.lin.count(z) && lin_j && !b.shares(z, j));
    } else if (clean_j) {
      for (int z : pj) weaken_partner(z, b.lin.count(z) && lin_i && !b.shares(z, i));
    } else {
      for (int z : pi) weaken_partner(z, false);
      for (int z : pj) {
        if (!pi.count(z)) weaken_partner(z, false);
      }
    }

    if (rmo & (kModeVar | kModeNgv)) {
      if (alias) {
        for (int a : pi) {
          for (int c : pj) add_ps(b, a, c);
        }
      } else if (clean_i) {
        for (int a : pi) {
          for (int c : pi) {
            if (a < c) add_ps(b, a, c);
          }
          for (int c : pj) add_ps(b, a, c);
        }
      } else if (clean_j) {
        for (int a : pj) {
          for (int c : pj) {
            if (a < c) add_ps(b, a, c);
          }
          for (int c : pi) add_ps(b, a, c);
        }
      } else {
        std::set<int> all = pi;
        all.insert(pj.begin(), pj.end());
        for (int a : all) {
          for (int c : all) {
            if (a < c) add_ps(b, a, c);
          }
        }
      }
    }

    IndexInfo ni;
    ni.mo = rmo;
    ni.ty = rty;
    ni.nm = rnm;
    if (ii.frm && jj.frm) {
      if (ii.frm->fn != jj.frm->fn) {
        fail = true;
        return;
      }
      ni.frm = ii.frm;
      for (size_t k = 0; k < ii.frm->kids.size(); ++k) {
        work.push_back({ii.frm->kids[k], jj.frm->kids[k]});
      }
    } else {
      ni.frm = ii.frm ? ii.frm : jj.frm;
    }

    bool rlin = (lin_i && lin_j && !sh) || (rmo & (kModeVar | kModeNgv)) == 0;
    b.lin.erase(i);
    b.lin.erase(j);

    // Sizes survive the merge only under a stable norm that matches the
    // merged type; an untouched side is stable regardless.
    bool stable_i = ii.nm != Norm::TermSize || ii.mo == kModeGr || clean_j;
    bool stable_j = jj.nm != Norm::TermSize || jj.mo == kModeGr || clean_i;
    bool keep_i = stable_i && ii.nm == rnm;
    bool keep_j = stable_j && jj.nm == rnm;
    auto keep = b.eqs.vars();
    if (!keep_i) keep.erase("s" + std::to_string(i));
    if (!keep_j) keep.erase("s" + std::to_string(j));
    b.eqs = b.eqs.project(keep).renamed({{"s" + std::to_string(j), "s" + std::to_string(i)}});

    b.parent[j] = i;
    b.info[i] = ni;
    if (rlin) b.lin.insert(i);
    rebuild_ps(b);
  }
};

// Both classes hold the same term in every concretization: same class,
// or equal functors over surely equal kids.
bool classes_surely_equal(const AbstractSubst& b, int i, int j, int depth = 0) {
  i = b.find(i);
  j = b.find(j);
  if (i == j) return true;
  if (depth > 64) return false;
  const auto& fi = b.info[i].frm;
  const auto& fj = b.info[j].frm;
  if (!fi || !fj || fi->fn != fj->fn) return false;
  for (size_t k = 0; k < fi->kids.size(); ++k) {
    if (!classes_surely_equal(b, fi->kids[k], fj->kids[k], depth + 1)) return false;
  }
  return true;
}

UnifyOutcome finish_unify(Unifier& u, bool sure_success, const AbstractSubst& pre) {
  UnifyOutcome out;
  if (u.fail) {
    out.after = beta_bottom();
    out.sure_failure = true;
    return out;
  }
  normalize_beta(u.b);
  if (u.b.bottom) {
    out.after = beta_bottom();
    out.sure_failure = true;
    return out;
  }
  std::set<int> troots;
  for (int s : u.touched_slots) troots.insert(u.b.find(s));
  for (const auto& [v, slot] : u.b.sv) {
    if (!troots.count(u.b.find(slot))) continue;
    // A merge can absorb marked slots into the class of a variable whose
    // own term was ground all along; ground terms never change.
    int pv = pre.var_index(v);
    if (pv >= 0 && pre.at(pv).mo == kModeGr) continue;
    out.touched.insert(v);
  }
  out.after = u.b;
  out.sure_success = sure_success;
  return out;
}

}  // namespace

UnifyOutcome abstract_unify_vars(const AbstractSubst& b, const std::string& x,
                                 const std::string& y) {
  UnifyOutcome out;
  if (b.bottom) {
    out.after = beta_bottom();
    return out;
  }
  int i = b.var_index(x), j = b.var_index(y);
  if (i < 0 || j < 0) throw std::logic_error("abstract unify: unknown variable");
  // var=var always unifies, a fresh var takes any term, and equal
  // sure structures cannot clash
  bool ss = i == j || (b.at(i).mo == kModeVar && b.at(j).mo == kModeVar) ||
            (b.at(i).mo == kModeVar && !b.shares(i, j)) ||
            (b.at(j).mo == kModeVar && !b.shares(i, j)) || classes_surely_equal(b, i, j);
  Unifier u{b};
  u.work.push_back({i, j});
  u.run();
  return finish_unify(u, ss, b);
}

UnifyOutcome abstract_unify_structure(const AbstractSubst& b, const std::string& x,
                                      const FunctorSym& fn,
                                      const std::vector<std::string>& args) {
  UnifyOutcome out;
  if (b.bottom) {
    out.after = beta_bottom();
    return out;
  }
  AbstractSubst w = b;
  int ix = w.var_index(x);
  if (ix < 0) throw std::logic_error("abstract unify: unknown variable");
  std::vector<int> kid;
  for (const auto& a : args) {
    int r = w.var_index(a);
    if (r < 0) throw std::logic_error("abstract unify: unknown variable");
    kid.push_back(r);
  }

  // A definite occur check failure: a pure variable against a structure
  // that surely contains it.
  if (w.at(ix).mo == kModeVar) {
    for (int r : kid) {
      if (w.find(r) == ix) {
        out.after = beta_bottom();
        out.sure_failure = true;
        return out;
      }
    }
  }

  bool ss = w.at(ix).mo == kModeVar;
  for (int r : kid) {
    if (w.shares(ix, r) || w.find(r) == w.find(ix)) ss = false;
  }

  IndexInfo ti;
  ti.mo = kModeNovar;
  ti.ty = ty_any();
  ti.frm = Frame{fn, kid};
  ti.nm = Norm::TermSize;
  int t = beta_add_index(w, ti);
  for (int r : kid) {
    add_ps(w, t, r);
    for (int z : ps_partners(w, r)) add_ps(w, t, z);
  }
  bool tlin = true;
  std::map<int, int> occ;
  for (int r : kid) occ[w.find(r)]++;
  for (const auto& [r, n] : occ) {
    if (!w.is_linear(r)) tlin = false;
    if (n > 1 && (w.at(r).mo & (kModeVar | kModeNgv))) tlin = false;
  }
  for (const auto& [r1, n1] : occ) {
    for (const auto& [r2, n2] : occ) {
      if (r1 < r2 && w.shares(r1, r2)) tlin = false;
    }
  }
  if (tlin) w.lin.insert(t);

  // The variable may already carry exactly this structure.
  if (classes_surely_equal(w, ix, t)) ss = true;

  // Pattern decomposition: the frame matches and every argument is a
  // fresh variable with no stake in the matched term or in each other,
  // so each one just receives the corresponding child.
  if (!ss && w.at(ix).frm && w.at(ix).frm->fn == fn) {
    bool vars_ok = true;
    for (size_t k = 0; k < kid.size() && vars_ok; ++k) {
      int r = kid[k];
      if (w.at(r).mo != kModeVar || w.shares(ix, r) || w.find(r) == w.find(ix)) {
        vars_ok = false;
      }
      for (size_t z = 0; z < k && vars_ok; ++z) {
        if (w.shares(kid[z], r) || w.find(kid[z]) == w.find(r)) vars_ok = false;
      }
    }
    if (vars_ok) ss = true;
  }

  Unifier u{w};
  u.work.push_back({ix, t});
  u.run();
  return finish_unify(u, ss, b);
}

void beta_weaken_instantiated(AbstractSubst& b, const std::set<int>& roots) {
  if (b.bottom) return;
  std::set<int> affected;
  for (int r : roots) {
    int i = b.find(r);
    affected.insert(i);
    for (int z : ps_partners(b, i)) affected.insert(z);
  }
  for (int z : affected) {
    IndexInfo& zi = b.info[z];
    if ((zi.mo & (kModeVar | kModeNgv)) == 0) continue;
    zi.mo = mode_after_binding(zi.mo);
    b.lin.erase(z);
    if (zi.nm == Norm::TermSize) drop_size_var(b, z);
  }
  for (int a : affected) {
    for (int c : affected) {
      if (a < c && (b.info[a].mo & (kModeVar | kModeNgv)) &&
          (b.info[c].mo & (kModeVar | kModeNgv))) {
        add_ps(b, a, c);
      }
    }
  }
  normalize_beta(b);
}

AbstractSubst beta_restrict(const AbstractSubst& b, const std::vector<std::string>& vars,
                            const std::vector<std::string>& names) {
  if (vars.size() != names.size()) throw std::logic_error("restrict: arity mismatch");
  if (b.bottom) return beta_bottom();
  AbstractSubst t = b;
  std::map<std::string, int> nsv;
  for (size_t k = 0; k < vars.size(); ++k) {
    int idx = t.var_index(vars[k]);
    if (idx < 0) throw std::logic_error("restrict: unknown variable " + vars[k]);
    nsv[names[k]] = idx;
  }
  t.sv = std::move(nsv);
  return beta_compact(t);
}

namespace {

std::set<std::string> beta_var_names(const AbstractSubst& b) {
  std::set<std::string> out;
  for (const auto& [v, idx] : b.sv) out.insert(v);
  return out;
}

}  // namespace

AbstractSubst beta_glb(const AbstractSubst& a0, const AbstractSubst& b0) {
  if (a0.bottom || b0.bottom) return beta_bottom();
  if (beta_var_names(a0) != beta_var_names(b0)) {
    throw std::logic_error("glb: variable sets differ");
  }
  AbstractSubst A = beta_compact(a0), B = beta_compact(b0);
  int na = static_cast<int>(A.parent.size());
  int nb = static_cast<int>(B.parent.size());
  int n = na + nb;  // slot i: A index; slot na+j: B index

  std::vector<int> uf(n);
  for (int i = 0; i < n; ++i) uf[i] = i;
  auto ufind = [&](int x) {
    while (uf[x] != x) x = uf[x];
    return x;
  };
  auto side_frame = [&](int slot) -> const std::optional<Frame>& {
    return slot < na ? A.info[slot].frm : B.info[slot - na].frm;
  };
  auto slot_kids = [&](int slot) {
    std::vector<int> out;
    const auto& f = side_frame(slot);
    if (f) {
      for (int kid : f->kids) out.push_back(slot < na ? kid : na + kid);
    }
    return out;
  };

  bool clash = false;
  std::deque<std::pair<int, int>> work;
  for (const auto& [v, ia] : A.sv) work.push_back({ia, na + B.sv.at(v)});
  // per class remember one slot carrying a frame
  std::map<int, int> framed;
  while (!work.empty() && !clash) {
    auto [x, y] = work.front();
    work.pop_front();
    int rx = ufind(x), ry = ufind(y);
    if (rx != ry) {
      uf[ry] = rx;
      auto it = framed.find(ry);
      if (it != framed.end()) {
        int carrier = it->second;
        framed.erase(it);
        work.push_back({carrier, carrier});  // reprocess against rx's frame
      }
    }
    rx = ufind(x);
    for (int slot : {x, y}) {
      const auto& f = side_frame(slot);
      if (!f) continue;
      auto it = framed.find(rx);
      if (it == framed.end()) {
        framed[rx] = slot;
        continue;
      }
      const auto& g = side_frame(it->second);
      if (it->second == slot) continue;
      if (f->fn != g->fn) {
        clash = true;
        break;
      }
      auto ks = slot_kids(slot), kg = slot_kids(it->second);
      for (size_t k = 0; k < ks.size(); ++k) work.push_back({ks[k], kg[k]});
    }
  }
  if (clash) return beta_bottom();

  // classes to result indices
  std::map<int, int> cls;
  std::map<int, std::vector<int>> members;
  for (int s = 0; s < n; ++s) members[ufind(s)].push_back(s);
  AbstractSubst res;
  for (const auto& [rep, mem] : members) {
    IndexInfo inf;
    inf.mo = kModeAny;
    inf.ty = ty_any();
    for (int s : mem) {
      const IndexInfo& si = s < na ? A.info[s] : B.info[s - na];
      inf.mo = mode_glb(inf.mo, si.mo);
      inf.ty = ty_glb(inf.ty, si.ty);
    }
    // two surely disjoint terms forced equal can only be ground
    for (int s1 : mem) {
      for (int s2 : mem) {
        if (s1 >= s2 || (s1 < na) != (s2 < na)) continue;
        bool sh = s1 < na ? A.shares(s1, s2) : B.shares(s1 - na, s2 - na);
        if (!sh) inf.mo &= kModeGr;
      }
    }
    inf.nm = norm_for_type(inf.ty);
    cls[rep] = beta_add_index(res, inf);
  }
  for (const auto& [rep, mem] : members) {
    for (int s : mem) {
      const auto& f = side_frame(s);
      if (!f) continue;
      Frame nf{f->fn, {}};
      for (int kid : slot_kids(s)) nf.kids.push_back(cls.at(ufind(kid)));
      res.info[cls.at(rep)].frm = nf;
      break;
    }
  }
  for (const auto& [v, ia] : A.sv) res.sv[v] = cls.at(ufind(ia));

  // sharing allowed only when every member pair of each side allows it;
  // linearity holds when any member proves it
  auto side_allows = [&](const AbstractSubst& S, int base, const std::vector<int>& mc,
                         const std::vector<int>& md) {
    for (int s1 : mc) {
      if (s1 < base || s1 >= base + static_cast<int>(S.parent.size())) continue;
      for (int s2 : md) {
        if (s2 < base || s2 >= base + static_cast<int>(S.parent.size())) continue;
        if (!S.shares(s1 - base, s2 - base)) return false;
      }
    }
    return true;
  };
  for (auto it1 = members.begin(); it1 != members.end(); ++it1) {
    for (auto it2 = std::next(it1); it2 != members.end(); ++it2) {
      bool okA = side_allows(A, 0, it1->second, it2->second);
      bool okB = side_allows(B, na, it1->second, it2->second);
      if (okA && okB) add_ps(res, cls.at(it1->first), cls.at(it2->first));
    }
  }
  for (const auto& [rep, mem] : members) {
    for (int s : mem) {
      bool l = s < na ? A.lin.count(s) != 0 : B.lin.count(s - na) != 0;
      if (l) {
        res.lin.insert(cls.at(rep));
        break;
      }
    }
  }

  // size systems translate member variables onto class variables when
  // the member norm matches the class norm
  auto import_eqs = [&](const AbstractSubst& S, int base) {
    std::set<std::string> keep;
    std::map<std::string, std::string> ren;
    for (int s = base; s < base + static_cast<int>(S.parent.size()); ++s) {
      int c = cls.at(ufind(s));
      Norm snm = (s < na ? A.info[s] : B.info[s - na]).nm;
      if (snm != res.info[c].nm) continue;
      keep.insert("s" + std::to_string(s - base));
      ren["s" + std::to_string(s - base)] = "s" + std::to_string(c);
    }
    res.eqs.conjoin(S.eqs.project(keep).renamed(ren));
  };
  import_eqs(A, 0);
  import_eqs(B, na);

  normalize_beta(res);
  if (res.bottom) return beta_bottom();
  return beta_compact(res);
}

AbstractSubst beta_lub(const AbstractSubst& a0, const AbstractSubst& b0) {
  if (a0.bottom) return b0.bottom ? beta_bottom() : beta_compact(b0);
  if (b0.bottom) return beta_compact(a0);
  if (beta_var_names(a0) != beta_var_names(b0)) {
    throw std::logic_error("lub: variable sets differ");
  }
  AbstractSubst A = beta_compact(a0), B = beta_compact(b0);

  AbstractSubst res;
  std::map<std::pair<int, int>, int> pairidx;
  std::deque<std::pair<int, int>> work;
  auto get = [&](int i, int j) {
    auto key = std::make_pair(i, j);
    auto it = pairidx.find(key);
    if (it != pairidx.end()) return it->second;
    IndexInfo inf;
    inf.mo = mode_lub(A.info[i].mo, B.info[j].mo);
    inf.ty = ty_lub(A.info[i].ty, B.info[j].ty);
    inf.nm = norm_for_type(inf.ty);
    int idx = beta_add_index(res, inf);
    pairidx[key] = idx;
    work.push_back(key);
    return idx;
  };
  for (const auto& [v, ia] : A.sv) res.sv[v] = get(ia, B.sv.at(v));
  while (!work.empty()) {
    auto [i, j] = work.front();
    work.pop_front();
    int p = pairidx.at({i, j});
    const auto& fa = A.info[i].frm;
    const auto& fb = B.info[j].frm;
    if (fa && fb && fa->fn == fb->fn) {
      Frame nf{fa->fn, {}};
      for (size_t k = 0; k < fa->kids.size(); ++k) {
        nf.kids.push_back(get(fa->kids[k], fb->kids[k]));
      }
      res.info[p].frm = nf;
    }
    if (A.lin.count(i) && B.lin.count(j)) res.lin.insert(p);
  }
  for (const auto& [k1, p1] : pairidx) {
    for (const auto& [k2, p2] : pairidx) {
      if (p1 >= p2) continue;
      if (A.shares(k1.first, k2.first) || B.shares(k1.second, k2.second)) {
        add_ps(res, p1, p2);
      }
    }
  }

  // join of the size systems: keep exactly the facts provable on both
  // sides once member variables are expressed over the pair indices
  auto extend = [&](const AbstractSubst& S, bool first) {
    std::map<std::string, std::string> ren;
    for (const auto& v : S.eqs.vars()) ren[v] = (first ? "a_" : "b_") + v;
    LinCS e = S.eqs.renamed(ren);
    std::set<std::string> keep;
    for (const auto& [key, p] : pairidx) {
      int m = first ? key.first : key.second;
      Norm mn = first ? A.info[key.first].nm : B.info[key.second].nm;
      if (mn != res.info[p].nm) continue;
      e.add(con_eq(LinExpr::var("s" + std::to_string(p)),
                   LinExpr::var((first ? "a_s" : "b_s") + std::to_string(m))));
      keep.insert("s" + std::to_string(p));
    }
    return e.project(keep);
  };
  LinCS ea = extend(A, true), eb = extend(B, false);
  LinCS joined;
  for (const auto& c : ea.constraints()) {
    if (eb.entails(c)) joined.add(c);
  }
  for (const auto& c : eb.constraints()) {
    if (ea.entails(c)) joined.add(c);
  }
  res.eqs = joined;

  normalize_beta(res);
  return beta_compact(res);
}

bool beta_leq(const AbstractSubst& a0, const AbstractSubst& b0) {
  if (a0.bottom) return true;
  if (b0.bottom) return false;
  if (beta_var_names(a0) != beta_var_names(b0)) {
    throw std::logic_error("leq: variable sets differ");
  }
  AbstractSubst A = beta_compact(a0), B = beta_compact(b0);

  // map each class of B onto a class of A; B's equalities and structure
  // must already hold in A
  std::map<int, int> m;
  std::deque<std::pair<int, int>> work;  // (b index, a index)
  for (const auto& [v, jb] : B.sv) work.push_back({jb, A.sv.at(v)});
  while (!work.empty()) {
    auto [j, i] = work.front();
    work.pop_front();
    auto it = m.find(j);
    if (it != m.end()) {
      if (it->second != i) return false;
      continue;
    }
    m[j] = i;
    const auto& fb = B.info[j].frm;
    if (fb) {
      const auto& fa = A.info[i].frm;
      if (!fa || fa->fn != fb->fn) return false;
      for (size_t k = 0; k < fb->kids.size(); ++k) {
        work.push_back({fb->kids[k], fa->kids[k]});
      }
    }
  }

  for (const auto& [j, i] : m) {
    if ((A.info[i].mo & B.info[j].mo) != A.info[i].mo) return false;
    if (!ty_leq(A.info[i].ty, B.info[j].ty)) return false;
    if (B.lin.count(j) && !A.is_linear(i)) return false;
  }
  for (const auto& [j1, i1] : m) {
    for (const auto& [j2, i2] : m) {
      if (j1 >= j2) continue;
      if (!B.shares(j1, j2) && A.shares(i1, i2)) return false;
    }
  }

  // When the norms disagree the B measure is an unknown about which A
  // still knows nonnegativity (sizes and lengths are never negative).
  LinCS base = A.eqs;
  std::map<std::string, std::string> ren;
  auto bvars = B.eqs.vars();
  for (const auto& [j, i] : m) {
    std::string sj = "s" + std::to_string(j);
    if (!bvars.count(sj)) continue;
    if (B.info[j].nm == A.info[i].nm) {
      ren[sj] = "s" + std::to_string(i);
    } else {
      std::string fresh = "t" + std::to_string(j);
      ren[sj] = fresh;
      if (B.info[j].nm != Norm::IntValue) base.add(con_ge(LinExpr::var(fresh), LinExpr::cst(0)));
    }
  }
  LinCS need = B.eqs.renamed(ren);
  for (const auto& c : need.constraints()) {
    if (!base.entails(c)) return false;
  }
  return true;
}

bool beta_equal(const AbstractSubst& a, const AbstractSubst& b) {
  return beta_leq(a, b) && beta_leq(b, a);
}

bool models(const std::map<std::string, TermPtr>& theta, const AbstractSubst& b0) {
  if (b0.bottom) return false;
  AbstractSubst b = beta_compact(b0);
  int n = static_cast<int>(b.parent.size());
  std::vector<TermPtr> term_of(n);

  auto assign = [&](int root, const TermPtr& t, auto&& self) -> bool {
    if (term_of[root]) return term_equal(term_of[root], t);
    term_of[root] = t;
    const auto& f = b.info[root].frm;
    if (f) {
      if (t->kind == TermKind::Var) return false;
      if (principal_functor(t) != f->fn) return false;
      for (size_t k = 0; k < f->kids.size(); ++k) {
        if (!self(f->kids[k], t->args[k], self)) return false;
      }
    }
    return true;
  };

  for (const auto& [v, idx] : b.sv) {
    auto it = theta.find(v);
    if (it == theta.end()) throw std::logic_error("models: missing binding for " + v);
    if (!assign(idx, it->second, assign)) return false;
  }

  for (int i = 0; i < n; ++i) {
    if (!term_of[i]) return false;
    const IndexInfo& inf = b.info[i];
    if ((term_mode(term_of[i]) & inf.mo) == 0) return false;
    if (!term_has_type(term_of[i], inf.ty)) return false;
    if (b.lin.count(i) && !term_is_linear(term_of[i])) return false;
  }

  std::vector<std::vector<std::string>> vars_of(n);
  for (int i = 0; i < n; ++i) term_vars(term_of[i], vars_of[i]);
  for (int i = 0; i < n; ++i) {
    std::set<std::string> vi(vars_of[i].begin(), vars_of[i].end());
    for (int j = i + 1; j < n; ++j) {
      bool overlap = false;
      for (const auto& v : vars_of[j]) {
        if (vi.count(v)) {
          overlap = true;
          break;
        }
      }
      if (overlap && !b.ps.count({i, j})) return false;
    }
  }

  std::map<std::string, Rat> val;
  for (int i = 0; i < n; ++i) {
    auto v = term_norm_value(term_of[i], b.info[i].nm);
    if (!v) return false;
    val["s" + std::to_string(i)] = Rat(*v);
  }
  for (const auto& c : b.eqs.constraints()) {
    Rat acc = c.e.k;
    for (const auto& [v, cf] : c.e.coef) {
      auto it = val.find(v);
      if (it == val.end()) return false;
      acc += cf * it->second;
    }
    bool ok = c.rel == Rel::Le0   ? acc <= Rat(0)
              : c.rel == Rel::Lt0 ? acc < Rat(0)
                                  : acc == Rat(0);
    if (!ok) return false;
  }
  return true;
}

std::string beta_to_string(const AbstractSubst& b0) {
  if (b0.bottom) return "bottom";
  AbstractSubst b = beta_compact(b0);
  std::ostringstream os;
  std::map<int, std::vector<std::string>> names;
  for (const auto& [v, idx] : b.sv) names[idx].push_back(v);
  for (int i = 0; i < static_cast<int>(b.parent.size()); ++i) {
    if (i) os << "\n";
    os << "i" << i << "{";
    bool first = true;
    for (const auto& v : names[i]) {
      if (!first) os << ",";
      os << v;
      first = false;
    }
    os << "}: " << mode_to_string(b.info[i].mo) << " " << ty_to_string(b.info[i].ty);
    if (b.info[i].frm) {
      const Frame& f = *b.info[i].frm;
      os << " frm=";
      if (f.fn.is_int) {
        os << f.fn.value;
      } else if (is_cons_fn(f.fn)) {
        os << "[i" << f.kids[0] << "|i" << f.kids[1] << "]";
      } else {
        os << f.fn.name;
        if (!f.kids.empty()) {
          os << "(";
          for (size_t k = 0; k < f.kids.size(); ++k) {
            if (k) os << ",";
            os << "i" << f.kids[k];
          }
          os << ")";
        }
      }
    }
    if (b.lin.count(i)) os << " lin";
  }
  if (!b.ps.empty()) {
    os << "\nps:";
    for (const auto& [p, q] : b.ps) os << " (i" << p << ",i" << q << ")";
  }
  if (!b.eqs.empty()) os << "\nsize: " << b.eqs.str();
  return os.str();
}

}  // namespace specpl
