#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specpl/linear.hpp"
#include "specpl/term.hpp"

namespace specpl {

// Instantiation modes form a powerset lattice over three disjoint term
// classes: ground, variable, nonground nonvar. The subset {var,ngv} is
// not representable on its own and widens to any.
constexpr int kModeNone = 0;
constexpr int kModeGr = 1;
constexpr int kModeVar = 2;
constexpr int kModeGv = 3;
constexpr int kModeNgv = 4;
constexpr int kModeNovar = 5;
constexpr int kModeAny = 7;

int mode_fix(int m);
int mode_lub(int a, int b);
int mode_glb(int a, int b);
// Mode of both sides after a successful unification, per primitive pair.
int unify_mode(int a, int b);
// Weakest mode a term of mode m can reach under further instantiation.
int mode_after_binding(int m);
int term_mode(const TermPtr& t);
std::string mode_to_string(int m);

// Types: bot =< int, atom, list(t) =< any; list is monotone in its
// element type and list(bot) = {[]} =< atom. Every type is closed under
// instantiation, so bindings never invalidate a type fact.
struct TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;
struct TypeExpr {
  enum Kind { Bot, Any, Int, Atom, List } kind = Any;
  TypePtr elem;  // List only
};

TypePtr ty_bot();
TypePtr ty_any();
TypePtr ty_int();
TypePtr ty_atom();
TypePtr ty_list(TypePtr elem);
bool ty_is_bot(const TypePtr& t);
bool ty_is_any(const TypePtr& t);
// True when every member of the type is a ground term.
bool ty_is_ground(const TypePtr& t);
bool ty_leq(const TypePtr& a, const TypePtr& b);
bool ty_equal(const TypePtr& a, const TypePtr& b);
TypePtr ty_glb(const TypePtr& a, const TypePtr& b);
TypePtr ty_lub(const TypePtr& a, const TypePtr& b);
bool term_has_type(const TermPtr& t, const TypePtr& ty);
std::string ty_to_string(const TypePtr& t);

// Size measure attached to an index. ListLen and IntValue are stable
// under instantiation of the measured term, TermSize is not; staleness
// handling in the operations depends on that distinction.
enum class Norm { TermSize, ListLen, IntValue };
Norm norm_for_type(const TypePtr& t);
std::string norm_to_string(Norm n);
// Concrete measure; nullopt when the norm does not apply to the term.
std::optional<BigInt> term_norm_value(const TermPtr& t, Norm n);

// Sure structure of an index: principal functor plus child indices.
struct Frame {
  FunctorSym fn;
  std::vector<int> kids;
};

struct IndexInfo {
  int mo = kModeAny;
  TypePtr ty;  // null means any
  std::optional<Frame> frm;
  Norm nm = Norm::TermSize;
};

// Abstract substitution. Indices are sameness classes of terms reached
// by the clause variables (sv) and by frames; ps lists pairs that may
// share a variable (absence is a sure no), lin lists surely linear
// indices and eqs holds linear facts over the index sizes s<i> under
// each index norm. bottom represents the empty concretization.
struct AbstractSubst {
  bool bottom = false;
  std::map<std::string, int> sv;
  std::vector<int> parent;      // union-find forest over index slots
  std::vector<IndexInfo> info;  // authoritative at roots only
  std::set<std::pair<int, int>> ps;
  std::set<int> lin;
  LinCS eqs;

  int find(int i) const;
  int var_index(const std::string& v) const;  // -1 when absent
  bool shares(int i, int j) const;
  bool is_linear(int i) const;
  const IndexInfo& at(int i) const;
  std::string size_var(int i) const;
};

AbstractSubst beta_bottom();
// Every variable free, fresh and pairwise unaliased.
AbstractSubst beta_all_free(const std::vector<std::string>& vars);

int beta_add_index(AbstractSubst& b, IndexInfo inf);
void beta_bind_var(AbstractSubst& b, const std::string& v, int idx);
int beta_add_free_var(AbstractSubst& b, const std::string& v);

// Closure of the coherence rules: mode/type/frame agreement, sharing and
// linearity propagation through frames, frame derived size equations,
// norm upgrades when a type improves, bottom detection.
void normalize_beta(AbstractSubst& b);

// Stable renumbering: named roots in variable order, then frame kids
// depth first. Drops unreachable slots and their constraints.
AbstractSubst beta_compact(const AbstractSubst& b);

struct UnifyOutcome {
  AbstractSubst after;  // bottom on sure failure
  bool sure_success = false;
  bool sure_failure = false;
  std::set<std::string> touched;  // vars whose term may have changed
};

UnifyOutcome abstract_unify_vars(const AbstractSubst& b, const std::string& x,
                                 const std::string& y);
UnifyOutcome abstract_unify_structure(const AbstractSubst& b, const std::string& x,
                                      const FunctorSym& fn,
                                      const std::vector<std::string>& args);

// Weakens roots (and their sharing partners) that an opaque operation may
// instantiate: modes widen, linearity drops, sharing closes, unstable
// sizes leave eqs. Used for calls whose effect is known only by spec.
void beta_weaken_instantiated(AbstractSubst& b, const std::set<int>& roots);

// Keeps exactly vars[k], renamed to names[k]; indices unreachable from
// the kept variables disappear along with their constraints.
AbstractSubst beta_restrict(const AbstractSubst& b, const std::vector<std::string>& vars,
                            const std::vector<std::string>& names);

// Meet and join; both sides must cover the same variable set.
AbstractSubst beta_glb(const AbstractSubst& a, const AbstractSubst& b);
AbstractSubst beta_lub(const AbstractSubst& a, const AbstractSubst& b);
bool beta_leq(const AbstractSubst& a, const AbstractSubst& b);
bool beta_equal(const AbstractSubst& a, const AbstractSubst& b);

// Concretization membership: does the binding theta satisfy every
// component of b? Drives the soundness tests of all operations.
bool models(const std::map<std::string, TermPtr>& theta, const AbstractSubst& b);

std::string beta_to_string(const AbstractSubst& b);

}  // namespace specpl
