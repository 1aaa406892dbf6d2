#pragma once

#include "specpl/program.hpp"

#include <stdexcept>
#include <string>

namespace specpl {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

// Parses a sequence of clauses. Conjunctions become body literal sequences;
// recognizable goals are classified (unifications between variables or
// against a flat functor pattern, calls with distinct variable arguments,
// `!`, `not/1` and `\+/1`); everything else is kept as a General literal for
// the normalizer. The if-then-else arrow `->` is rejected.
Program parse_program(const std::string& text);

// Single term, for queries. Must consume the whole input (a trailing `.` is
// permitted).
TermPtr parse_term_string(const std::string& text);

// Flattens a conjunction into body literals under the same classification
// parse_program applies. Throws ParseError for goals that cannot appear in
// a body (variables, integers).
std::vector<Literal> goal_term_to_literals(const TermPtr& goal);

} // namespace specpl
