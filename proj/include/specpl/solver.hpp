#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specpl/program.hpp"
#include "specpl/term.hpp"

namespace specpl {

// One answer: query variable -> fully resolved term. Unbound output
// variables stay as (renamed) variables.
struct Substitution {
  std::map<std::string, TermPtr> bind;
};

enum class Terminator { Complete, BudgetExhausted };

struct AnswerSequence {
  std::vector<Substitution> answers;
  Terminator terminator = Terminator::Complete;
};

// Execution effort, modeled at the source level. A choice point is created
// when a call still has more than one candidate clause; the last candidate
// pops it (try/retry/trust), a cut discards every choice point younger than
// the call of the clause it occurs in. residual_choicepoints_after_first_answer
// is the number still alive the moment the first answer is delivered; it
// stays 0 when no answer is produced.
struct CostCounters {
  long long inferences = 0;
  long long choicepoints_created = 0;
  long long max_live_choicepoints = 0;
  long long residual_choicepoints_after_first_answer = 0;
};

struct SolveOptions {
  long long budget = 1000000; // bound on inferences (clause-body entries)
  bool occur_check = true;    // false: a cycle raises SolveError instead of failing
  bool model_indexing = false; // suppress candidates with clashing first-arg functor
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs `goal` against `p`: answers in textual clause order, depth first,
// left to right; cut prunes the clause alternatives of the procedure it
// occurs in plus the alternatives of literals to its left; not(g) succeeds
// iff g has no answer and binds nothing. Builtins: =, ==, \==, <, =<, >,
// >=, is. Calling an undefined predicate or evaluating arithmetic on a
// non-integer raises SolveError.
std::pair<AnswerSequence, CostCounters> solve(const Program& p, const TermPtr& goal,
                                              const SolveOptions& opt = {});

// Most general unifier of two terms, or nullopt when they do not unify.
// With occur_check=false a cycle-creating binding raises SolveError.
std::optional<Substitution> unify_terms(const TermPtr& a, const TermPtr& b,
                                        bool occur_check = true);

} // namespace specpl
