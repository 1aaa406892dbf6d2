#pragma once

#include <stdexcept>
#include <string>

#include "specpl/program.hpp"

namespace specpl {

struct NormalizeError : std::runtime_error {
  explicit NormalizeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rewrites a program into the restricted clause form:
//   - heads are p(X1,...,Xn) with distinct variables named by position
//   - bodies contain only Xi=Xj, Xi=f(...distinct vars...), calls with
//     pairwise-distinct variable arguments, !, and not(literal)
//   - the variables of each clause are exactly X1..Xm, numbered by first
//     occurrence (head left to right, then body left to right)
// Disjunctions become auxiliary predicates named <pred>__disj<k> over the
// variables the disjunction shares with the rest of the clause. Structure
// arguments of goals are split off through fresh variables; such helper
// unifications always succeed (fresh variable on the left), which also lets
// them be hoisted out of negations soundly.
// Throws NormalizeError for cuts inside disjunctions or negations.
Program normalize_program(const Program& p);

// True when `p` is already in the form produced by normalize_program.
// On failure, *why (if given) receives a one-line reason.
bool is_normalized(const Program& p, std::string* why = nullptr);

} // namespace specpl
