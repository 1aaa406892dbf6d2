#pragma once

#include "specpl/abstract_sequence.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace specpl {

struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument annotation. Mode and type are kept separate internally; surface
// tokens map onto both (int and atom imply groundness, list(gr) becomes
// ground mode with element type any).
struct SpecAnnot {
  int mo = kModeAny;
  TypePtr ty;
};

struct SpecArg {
  std::string name;
  SpecAnnot a;
};

// One specification block. Constraints keep the surface size-variable names
// (`T_in`, `TEff_out`, `sol`); the translation to an abstract sequence
// renames them onto positional variables.
struct FormalSpec {
  std::string pred;
  std::vector<SpecArg> in_args;
  std::vector<std::optional<SpecAnnot>> out_args;  // nullopt for `_`
  LinCS srel;
  LinCS sol;
  std::optional<std::string> sexpr;  // induction argument name

  int arity() const { return static_cast<int>(in_args.size()); }
};

// Parses any number of blocks. A block is a predicate name followed by
// `in(...)` and `sol(...)` groups, with optional `out(...)`, `srel(...)`
// and `sexpr(...)`, in any order, whitespace insensitive. `%` starts a
// line comment. Throws SpecError on unknown tokens, arity mismatches and
// constraints over undeclared arguments.
std::vector<FormalSpec> parse_specs(const std::string& text);

// Canonical printable form; parse_specs(spec_to_string(s)) reproduces s.
std::string spec_to_string(const FormalSpec& s);

// Builds the claimed sequence over canonical variables X1..Xn. beta_ref is
// beta_in (specs do not narrow the success class on their own), beta_fails
// is empty, U holds the ground input positions (a ground term cannot be
// instantiated; `_` in out makes no untouchedness claim). A contradictory
// in/out combination yields a bottom beta_out and a warning.
AbstractSequence spec_to_abstract_sequence(const FormalSpec& s,
                                           std::vector<std::string>* warnings = nullptr);

}  // namespace specpl
