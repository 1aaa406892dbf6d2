#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specpl/abstract_sequence.hpp"
#include "specpl/program.hpp"
#include "specpl/spec_lang.hpp"

namespace specpl {

// Program point inside a clause body. points[i] describes the state after
// the first i body literals; the sequence component is expressed over the
// head variables X1..Xn so it can be compared against specifications, while
// `state` keeps the full abstract substitution over every clause variable.
struct ClausePoint {
  AbstractSequence seq;
  AbstractSubst state;

  // About the literal executed into this point (meaningless at point 0).
  // lit_sure_success accounts for input classes already captured by the
  // cuts of earlier clauses: it may hold only for inputs reaching the clause.
  bool lit_sure_success = false;
  bool lit_sure_failure = false;
  bool lit_touches_nothing = false;
  bool lit_deterministic = false;  // the literal yields at most one answer
};

struct AnnotatedClause {
  Clause clause;
  std::vector<ClausePoint> points;  // body.size() + 1 entries
  bool has_cut = false;
  int cut_pos = -1;  // body index of the first cut
  // The cut fires on every input of the analyzed class.
  bool cut_surely_executed = false;
  // Input class on which the cut is certain to fire (prefix replay proves
  // sure success); inputs reaching later clauses lie outside it.
  std::optional<AbstractSubst> sure_cut_class;

  const AbstractSequence& result() const { return points.back().seq; }
};

struct AnnotatedProcedure {
  std::string pred;
  int arity = 0;
  int spec_index = -1;  // position in the spec list handed to analyze_program
  AbstractSequence claimed;
  std::vector<AnnotatedClause> clauses;
  AbstractSequence result;
  std::vector<bool> exclusive_pairs;  // row-major over clause pairs i<j
  bool accepted = false;
  bool termination_checked = false;
  std::string reason;  // first failed obligation when rejected
  std::vector<std::string> warnings;

  bool pair_exclusive(int i, int j) const;
};

struct AnalysisResult {
  std::vector<AnnotatedProcedure> procedures;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
  const AnnotatedProcedure* find(const std::string& pred, int arity,
                                 int spec_index = -1) const;
};

// Verifies every specification against its procedure by one abstract pass
// per clause: literals execute on the abstract substitution, calls resolve
// against the first spec whose input class covers the call arguments, and
// the per-clause sequences combine into a procedure behaviour that must be
// covered by the claim. Procedures without a spec are skipped; calls to
// them fail the caller. The program must be in normal form.
AnalysisResult analyze_program(const Program& p, const std::vector<FormalSpec>& specs);

// Human-readable dump of one analyzed procedure with the abstract sequence
// at every program point.
std::string annotated_to_string(const AnnotatedProcedure& ap);

}  // namespace specpl
