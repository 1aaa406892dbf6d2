#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace specpl {

// First-order terms. Lists are ordinary compounds built from './2' and the
// atom '[]'; the parser and printer provide the bracket sugar.
enum class TermKind { Var, Int, Atom, Compound };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;          // Var / Atom / Compound functor
  long long value = 0;       // Int
  std::vector<TermPtr> args; // Compound
};

TermPtr mk_var(std::string name);
TermPtr mk_int(long long v);
TermPtr mk_atom(std::string name);
TermPtr mk_compound(std::string functor, std::vector<TermPtr> args);
TermPtr mk_nil();
TermPtr mk_cons(TermPtr head, TermPtr tail);
// Proper list of `items`, or partial list when `tail` is given.
TermPtr mk_list(const std::vector<TermPtr>& items, TermPtr tail = nullptr);

bool is_nil(const TermPtr& t);
bool is_cons(const TermPtr& t);

// Structural equality, variable names included.
bool term_equal(const TermPtr& a, const TermPtr& b);

// Variables in order of first occurrence (depth-first, left-to-right).
void term_vars(const TermPtr& t, std::vector<std::string>& out);
bool term_is_ground(const TermPtr& t);
bool term_is_linear(const TermPtr& t);

// Node count; a variable counts as one node.
long long term_size(const TermPtr& t);
// Length of a nil-terminated list, or nullopt for anything else.
std::optional<long long> list_length(const TermPtr& t);

// Functor symbol: either a named functor with an arity or an integer
// constant (arity 0). Used by normalized unification literals and by the
// frame component of abstract substitutions.
struct FunctorSym {
  bool is_int = false;
  std::string name;
  long long value = 0;
  int arity = 0;

  static FunctorSym mk(std::string n, int a) { return FunctorSym{false, std::move(n), 0, a}; }
  static FunctorSym mk_int(long long v) { return FunctorSym{true, "", v, 0}; }

  bool operator==(const FunctorSym& o) const {
    return is_int == o.is_int && arity == o.arity &&
           (is_int ? value == o.value : name == o.name);
  }
  bool operator!=(const FunctorSym& o) const { return !(*this == o); }
  bool operator<(const FunctorSym& o) const {
    if (is_int != o.is_int) return is_int < o.is_int;
    if (arity != o.arity) return arity < o.arity;
    return is_int ? value < o.value : name < o.name;
  }
  std::string str() const;
};

// Principal functor of a non-variable term.
FunctorSym principal_functor(const TermPtr& t);

// Rewrites every variable name through `f`.
TermPtr rename_term_vars(const TermPtr& t,
                         const std::function<std::string(const std::string&)>& f);

} // namespace specpl
