#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "specpl/abstract_domain.hpp"
#include "specpl/program.hpp"
#include "specpl/solver.hpp"
#include "specpl/spec_lang.hpp"

namespace specpl {

struct HarnessError : std::runtime_error {
  explicit HarnessError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bounds for input generation and execution. The exhaustive part enumerates
// every ground list up to exhaustive_len over the integer alphabet
// [int_min, int_max] (secondary families of mixed-mode arguments are capped
// at length 2 to keep the tuple product tractable); the random part then
// draws random_count tuples with lengths up to max_list_len.
struct GeneratorConfig {
  int max_list_len = 8;
  int exhaustive_len = 4;
  int int_min = 1;
  int int_max = 3;
  int random_count = 200;
  std::uint64_t seed = 1;
  long long budget = 200000;       // solver inference bound per run
  bool model_indexing = false;
  std::vector<int> cost_sizes = {10, 100, 1000};
};

using InputTuple = std::vector<TermPtr>;

// Argument tuples for calls of the class beta_in (over X1..Xn): exhaustive
// enumeration within the bounds first, then seeded random samples. Every
// tuple satisfies models(); variable-mode positions receive fresh variables.
// Throws HarnessError when beta_in is bottom.
std::vector<InputTuple> generate_inputs(const AbstractSubst& beta_in,
                                        const GeneratorConfig& cfg);

enum class Verdict { Equal, Mismatch, Inconclusive };

struct InputResult {
  InputTuple input;
  Verdict verdict = Verdict::Equal;
  std::string detail;  // both answer sequences on mismatch
  CostCounters cost_left, cost_right;
};

struct DiffReport {
  std::vector<InputResult> rows;
  int equal = 0;
  int mismatched = 0;
  int inconclusive = 0;
  std::string witness;  // shrunk mismatching call, empty when none
  double mean_inference_ratio = 0.0;  // left / right over agreeing rows

  bool ok() const { return mismatched == 0; }
  std::string summary() const;
};

// Runs the spec's predicate on both programs for every generated input and
// compares the answer sequences exactly: length, order, and bindings of the
// call's variables, modulo consistent renaming of unbound output variables.
// Budget exhaustion on either side makes the input inconclusive. On the
// first mismatch the input is shrunk (list truncation, integer reduction,
// tail grounding) to a locally minimal witness.
DiffReport differential_check(const Program& left, const Program& right,
                              const FormalSpec& spec, const GeneratorConfig& cfg);

struct CostBucket {
  int size = 0;
  long long inferences_left = 0, inferences_right = 0;
  long long residual_left = 0, residual_right = 0;
  int answers_left = 0, answers_right = 0;
};

struct CostSummary {
  std::vector<CostBucket> buckets;
  // exact equality of the right-hand residual counter across all buckets
  bool right_residual_constant = false;
  // residual strictly increasing and at least half-proportional to size
  bool left_residual_grows = false;
  std::string to_string() const;
};

// One crafted first-answer workload per size: list arguments get a list of
// that length ending in the probe element, ground integer arguments get the
// probe element, output positions stay variables. Reports inference and
// residual-choice-point counters for both programs.
CostSummary cost_compare(const Program& left, const Program& right,
                         const FormalSpec& spec, const GeneratorConfig& cfg);

// The goal term pred(t1..tn) for a generated tuple.
TermPtr tuple_to_goal(const std::string& pred, const InputTuple& t);

// Key of one answer sequence: order-preserving, restricted to the call's
// variables, unbound outputs renamed by first occurrence. Two runs agree
// iff their keys are equal.
std::string answers_key(const InputTuple& input, const AnswerSequence& seq);

}  // namespace specpl
