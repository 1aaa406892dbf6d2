#pragma once

#include <set>
#include <string>
#include <vector>

#include "specpl/abstract_domain.hpp"
#include "specpl/linear.hpp"
#include "specpl/solver.hpp"

namespace specpl {

// Behaviour summary of executing one literal or one procedure call on an
// input class: which inputs are described (beta_in), which of them can
// succeed (beta_ref, always below beta_in), classes of inputs that surely
// fail (beta_fails), argument positions surely left untouched (U, 1-based
// over the canonical vars X1..Xn of beta_in), the answer class (beta_out),
// size relations between refined input and output (e_ref_out, over i<k>
// and o<k>) and the solution count law (e_sol, over sol and i<k>).
struct AbstractSequence {
  AbstractSubst beta_in;
  AbstractSubst beta_ref;
  std::vector<AbstractSubst> beta_fails;
  std::set<int> U;
  AbstractSubst beta_out;
  LinCS e_ref_out;
  LinCS e_sol;
};

// One terminating concrete run: the input binding and every answer.
struct ConcretePair {
  Substitution input;
  AnswerSequence answers;
};

// Adds a failing input class, keeping at most four entries by merging
// overflow into the last one.
void seq_add_fail(AbstractSequence& b, AbstractSubst beta);

// Every described run yields at most one answer.
bool deterministic(const AbstractSequence& b);
// Every described run yields exactly one answer.
bool fully_deterministic(const AbstractSequence& b);
// Every described run yields at least one answer.
bool surely_succeeds(const AbstractSequence& b);
// At most one answer and the input comes back untouched.
bool test_literal(const AbstractSequence& b);
// No shared input can succeed in both.
bool exclusive(const AbstractSequence& b1, const AbstractSequence& b2);
// Componentwise inclusion of the computed behaviour in the promised one.
bool covered_by(const AbstractSequence& computed, const AbstractSequence& spec);

std::string seq_to_string(const AbstractSequence& b);

}  // namespace specpl
