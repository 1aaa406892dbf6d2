#include "specpl/harness.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "specpl/printer.hpp"

namespace specpl {
namespace {

std::string pos_var(const char* stem, int j) { return std::string("_") + stem + std::to_string(j); }

// What shapes an argument position admits. Wrong guesses for mixed classes
// are weeded out by the models() filter afterwards.
enum class ArgShape { FreshVar, GroundInt, GroundList, Partial };

std::vector<ArgShape> shapes_for(const IndexInfo& inf) {
  if (inf.mo == kModeVar) return {ArgShape::FreshVar};
  bool int_ok = ty_leq(ty_int(), inf.ty);
  bool list_ok = ty_leq(ty_list(ty_int()), inf.ty);
  if (inf.mo == kModeGr) {
    std::vector<ArgShape> s;
    if (int_ok) s.push_back(ArgShape::GroundInt);
    if (list_ok) s.push_back(ArgShape::GroundList);
    if (s.empty()) s.push_back(ArgShape::GroundInt);
    return s;
  }
  if (inf.mo == kModeNgv) return {ArgShape::Partial};
  std::vector<ArgShape> s;
  if (inf.mo & kModeVar) s.push_back(ArgShape::FreshVar);
  if (int_ok) s.push_back(ArgShape::GroundInt);
  if (list_ok) s.push_back(ArgShape::GroundList);
  if (inf.mo & kModeNgv) s.push_back(ArgShape::Partial);
  return s;
}

void enumerate_lists(int len_bound, int lo, int hi, const std::function<void(TermPtr)>& emit) {
  std::vector<long long> elems;
  std::function<void(int)> rec = [&](int len) {
    if (len == 0) {
      std::vector<TermPtr> items;
      for (long long e : elems) items.push_back(mk_int(e));
      emit(mk_list(items));
      return;
    }
    for (long long e = lo; e <= hi; ++e) {
      elems.push_back(e);
      rec(len - 1);
      elems.pop_back();
    }
  };
  for (int len = 0; len <= len_bound; ++len) rec(len);
}

std::vector<TermPtr> exhaustive_family(ArgShape sh, int j, const GeneratorConfig& cfg,
                                       bool primary) {
  std::vector<TermPtr> out;
  switch (sh) {
    case ArgShape::FreshVar:
      out.push_back(mk_var(pos_var("G", j)));
      break;
    case ArgShape::GroundInt:
      for (long long v = cfg.int_min; v <= cfg.int_max; ++v) out.push_back(mk_int(v));
      break;
    case ArgShape::GroundList: {
      // Secondary list families (an `any` argument that merely admits lists)
      // stay short so the tuple product stays tractable.
      int bound = primary ? cfg.exhaustive_len : std::min(2, cfg.exhaustive_len);
      enumerate_lists(bound, cfg.int_min, cfg.int_max, [&](TermPtr t) { out.push_back(t); });
      break;
    }
    case ArgShape::Partial:
      for (long long v = cfg.int_min; v <= cfg.int_max; ++v) {
        out.push_back(mk_list({mk_int(v)}, mk_var(pos_var("T", j))));
      }
      break;
  }
  return out;
}

bool tuple_models(const InputTuple& t, const AbstractSubst& beta_in) {
  std::map<std::string, TermPtr> theta;
  for (int j = 0; j < static_cast<int>(t.size()); ++j) {
    theta["X" + std::to_string(j + 1)] = t[j];
  }
  return models(theta, beta_in);
}

TermPtr random_term(ArgShape sh, int j, const GeneratorConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<long long> elem(cfg.int_min, cfg.int_max);
  switch (sh) {
    case ArgShape::FreshVar:
      return mk_var(pos_var("G", j));
    case ArgShape::GroundInt:
      return mk_int(elem(rng));
    case ArgShape::GroundList: {
      std::uniform_int_distribution<int> len(0, cfg.max_list_len);
      std::vector<TermPtr> items;
      int n = len(rng);
      for (int i = 0; i < n; ++i) items.push_back(mk_int(elem(rng)));
      return mk_list(items);
    }
    case ArgShape::Partial: {
      std::uniform_int_distribution<int> len(1, std::max(1, cfg.max_list_len / 2));
      std::vector<TermPtr> items;
      int n = len(rng);
      for (int i = 0; i < n; ++i) items.push_back(mk_int(elem(rng)));
      return mk_list(items, mk_var(pos_var("T", j)));
    }
  }
  return mk_var(pos_var("G", j));
}

std::vector<std::string> tuple_vars(const InputTuple& t) {
  std::vector<std::string> vs;
  for (const auto& a : t) term_vars(a, vs);
  std::vector<std::string> uniq;
  std::set<std::string> seen;
  for (const auto& v : vs) {
    if (seen.insert(v).second) uniq.push_back(v);
  }
  return uniq;
}

std::string call_text(const std::string& pred, const InputTuple& t) {
  return term_to_string(tuple_to_goal(pred, t));
}

// Shrink candidates for one argument, strictly smaller each time.
std::vector<TermPtr> shrink_arg(const TermPtr& t, const GeneratorConfig& cfg) {
  std::vector<TermPtr> out;
  if (t->kind == TermKind::Int) {
    if (t->value > cfg.int_min) out.push_back(mk_int(t->value - 1));
    return out;
  }
  std::vector<TermPtr> items;
  TermPtr cur = t;
  while (is_cons(cur)) {
    items.push_back(cur->args[0]);
    cur = cur->args[1];
  }
  if (items.empty()) return out;
  bool partial = cur->kind == TermKind::Var;
  if (partial) out.push_back(mk_list(items));  // ground the tail
  std::vector<TermPtr> drop_last(items.begin(), items.end() - 1);
  out.push_back(mk_list(drop_last, partial ? cur : nullptr));
  if (items.size() > 1) {
    std::vector<TermPtr> drop_first(items.begin() + 1, items.end());
    out.push_back(mk_list(drop_first, partial ? cur : nullptr));
  }
  return out;
}

struct RunOutcome {
  AnswerSequence seq;
  CostCounters cost;
  bool error = false;
  std::string error_text;
};

RunOutcome run_one(const Program& p, const std::string& pred, const InputTuple& t,
                   const GeneratorConfig& cfg, long long budget) {
  RunOutcome r;
  SolveOptions opt;
  opt.budget = budget;
  opt.model_indexing = cfg.model_indexing;
  try {
    auto [seq, cost] = solve(p, tuple_to_goal(pred, t), opt);
    r.seq = std::move(seq);
    r.cost = cost;
  } catch (const SolveError& e) {
    r.error = true;
    r.error_text = e.what();
  }
  return r;
}

}  // namespace

TermPtr tuple_to_goal(const std::string& pred, const InputTuple& t) {
  if (t.empty()) return mk_atom(pred);
  return mk_compound(pred, t);
}

std::string answers_key(const InputTuple& input, const AnswerSequence& seq) {
  std::vector<std::string> qvars = tuple_vars(input);
  std::ostringstream os;
  os << seq.answers.size() << " answers";
  for (const auto& ans : seq.answers) {
    std::map<std::string, std::string> ren;
    auto rn = [&](const std::string& v) {
      auto it = ren.find(v);
      if (it == ren.end()) {
        it = ren.emplace(v, "_R" + std::to_string(ren.size())).first;
      }
      return it->second;
    };
    os << "; ";
    for (const auto& qv : qvars) {
      auto it = ans.bind.find(qv);
      TermPtr t = it == ans.bind.end() ? mk_var(qv) : it->second;
      os << qv << "=" << term_to_string(t, rn) << " ";
    }
  }
  return os.str();
}

std::vector<InputTuple> generate_inputs(const AbstractSubst& beta_in,
                                        const GeneratorConfig& cfg) {
  if (beta_in.bottom) throw HarnessError("input class is empty");
  int n = static_cast<int>(beta_in.sv.size());
  std::vector<std::vector<TermPtr>> fam(n);
  std::vector<std::vector<ArgShape>> shapes(n);
  for (int j = 0; j < n; ++j) {
    int idx = beta_in.var_index("X" + std::to_string(j + 1));
    if (idx < 0) throw HarnessError("input class lacks canonical argument variables");
    const IndexInfo& inf = beta_in.at(idx);
    shapes[j] = shapes_for(inf);
    bool primary = shapes[j].size() == 1;
    for (ArgShape sh : shapes[j]) {
      for (auto& t : exhaustive_family(sh, j + 1, cfg, primary)) fam[j].push_back(t);
    }
  }

  std::vector<InputTuple> out;
  InputTuple cur(n);
  std::function<void(int)> product = [&](int j) {
    if (j == n) {
      if (tuple_models(cur, beta_in)) out.push_back(cur);
      return;
    }
    for (const auto& t : fam[j]) {
      cur[j] = t;
      product(j + 1);
    }
  };
  product(0);

  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < cfg.random_count; ++i) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      InputTuple t(n);
      for (int j = 0; j < n; ++j) {
        std::uniform_int_distribution<size_t> pick(0, shapes[j].size() - 1);
        t[j] = random_term(shapes[j][pick(rng)], j + 1, cfg, rng);
      }
      if (tuple_models(t, beta_in)) {
        out.push_back(std::move(t));
        break;
      }
    }
  }
  return out;
}

std::string DiffReport::summary() const {
  std::ostringstream os;
  os << equal << " equal, " << mismatched << " mismatched, " << inconclusive
     << " inconclusive";
  if (!witness.empty()) os << "; witness " << witness;
  if (mean_inference_ratio > 0) os << "; mean inference ratio " << mean_inference_ratio;
  return os.str();
}

DiffReport differential_check(const Program& left, const Program& right,
                              const FormalSpec& spec, const GeneratorConfig& cfg) {
  AbstractSequence claim = spec_to_abstract_sequence(spec);
  std::vector<InputTuple> inputs = generate_inputs(claim.beta_in, cfg);

  DiffReport rep;
  double ratio_sum = 0.0;
  int ratio_n = 0;

  auto verdict_of = [&](const InputTuple& t, InputResult& row) {
    RunOutcome a = run_one(left, spec.pred, t, cfg, cfg.budget);
    RunOutcome b = run_one(right, spec.pred, t, cfg, cfg.budget);
    row.cost_left = a.cost;
    row.cost_right = b.cost;
    if (a.error || b.error) {
      row.verdict = Verdict::Inconclusive;
      row.detail = a.error ? a.error_text : b.error_text;
      return;
    }
    if (a.seq.terminator == Terminator::BudgetExhausted ||
        b.seq.terminator == Terminator::BudgetExhausted) {
      row.verdict = Verdict::Inconclusive;
      row.detail = "budget exhausted";
      return;
    }
    std::string ka = answers_key(t, a.seq), kb = answers_key(t, b.seq);
    if (ka == kb) {
      row.verdict = Verdict::Equal;
      return;
    }
    row.verdict = Verdict::Mismatch;
    row.detail = "left: " + ka + " | right: " + kb;
  };

  bool have_witness = false;
  for (const auto& t : inputs) {
    InputResult row;
    row.input = t;
    verdict_of(t, row);
    switch (row.verdict) {
      case Verdict::Equal:
        ++rep.equal;
        if (row.cost_right.inferences > 0) {
          ratio_sum += double(row.cost_left.inferences) / double(row.cost_right.inferences);
          ++ratio_n;
        }
        break;
      case Verdict::Mismatch:
        ++rep.mismatched;
        break;
      case Verdict::Inconclusive:
        ++rep.inconclusive;
        break;
    }
    if (row.verdict == Verdict::Mismatch && !have_witness) {
      // local minimum: no single-argument shrink still mismatches
      InputTuple w = t;
      for (int round = 0; round < 200; ++round) {
        bool improved = false;
        for (size_t j = 0; j < w.size() && !improved; ++j) {
          for (const auto& smaller : shrink_arg(w[j], cfg)) {
            InputTuple cand = w;
            cand[j] = smaller;
            if (!tuple_models(cand, claim.beta_in)) continue;
            InputResult probe;
            probe.input = cand;
            verdict_of(cand, probe);
            if (probe.verdict == Verdict::Mismatch) {
              w = cand;
              improved = true;
              break;
            }
          }
        }
        if (!improved) break;
      }
      rep.witness = call_text(spec.pred, w);
      have_witness = true;
    }
    rep.rows.push_back(std::move(row));
  }
  if (ratio_n > 0) rep.mean_inference_ratio = ratio_sum / ratio_n;
  return rep;
}

std::string CostSummary::to_string() const {
  std::ostringstream os;
  for (const auto& b : buckets) {
    os << "size " << b.size << ": left inferences=" << b.inferences_left
       << " residual=" << b.residual_left << " | right inferences=" << b.inferences_right
       << " residual=" << b.residual_right << "\n";
  }
  os << "right residual constant: " << (right_residual_constant ? "yes" : "no") << "\n";
  os << "left residual grows: " << (left_residual_grows ? "yes" : "no") << "\n";
  return os.str();
}

CostSummary cost_compare(const Program& left, const Program& right,
                         const FormalSpec& spec, const GeneratorConfig& cfg) {
  AbstractSequence claim = spec_to_abstract_sequence(spec);
  const AbstractSubst& bin = claim.beta_in;
  if (bin.bottom) throw HarnessError("input class is empty");
  int n = static_cast<int>(bin.sv.size());
  long long probe = cfg.int_max;

  CostSummary sum;
  for (int size : cfg.cost_sizes) {
    InputTuple t(n);
    for (int j = 0; j < n; ++j) {
      const IndexInfo& inf = bin.at(bin.var_index("X" + std::to_string(j + 1)));
      if (inf.mo == kModeGr && !ty_leq(ty_int(), inf.ty) &&
          ty_leq(ty_list(ty_int()), inf.ty)) {
        // the probe element sits last so the first answer needs a full descent
        std::vector<TermPtr> items;
        for (int i = 0; i + 1 < size; ++i) items.push_back(mk_int(cfg.int_min));
        items.push_back(mk_int(probe));
        t[j] = mk_list(items);
      } else if (inf.mo == kModeGr) {
        t[j] = mk_int(probe);
      } else {
        t[j] = mk_var(pos_var("O", j + 1));
      }
    }
    long long budget = std::max(cfg.budget, 2000LL * size);
    RunOutcome a = run_one(left, spec.pred, t, cfg, budget);
    RunOutcome b = run_one(right, spec.pred, t, cfg, budget);
    CostBucket bucket;
    bucket.size = size;
    bucket.inferences_left = a.cost.inferences;
    bucket.inferences_right = b.cost.inferences;
    bucket.residual_left = a.cost.residual_choicepoints_after_first_answer;
    bucket.residual_right = b.cost.residual_choicepoints_after_first_answer;
    bucket.answers_left = static_cast<int>(a.seq.answers.size());
    bucket.answers_right = static_cast<int>(b.seq.answers.size());
    sum.buckets.push_back(bucket);
  }

  if (!sum.buckets.empty()) {
    sum.right_residual_constant = true;
    for (const auto& b : sum.buckets) {
      if (b.residual_right != sum.buckets.front().residual_right) {
        sum.right_residual_constant = false;
      }
    }
    sum.left_residual_grows = sum.buckets.size() >= 2;
    for (size_t i = 1; i < sum.buckets.size(); ++i) {
      if (sum.buckets[i].residual_left <= sum.buckets[i - 1].residual_left) {
        sum.left_residual_grows = false;
      }
    }
    if (sum.left_residual_grows) {
      long long dr = sum.buckets.back().residual_left - sum.buckets.front().residual_left;
      long long ds = sum.buckets.back().size - sum.buckets.front().size;
      if (2 * dr < ds) sum.left_residual_grows = false;
    }
  }
  return sum;
}

}  // namespace specpl
