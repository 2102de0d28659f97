#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "streason/backend.hpp"
#include "streason/stprogram.hpp"

namespace streason {

enum class StepStatus { Match, Wrong, Missing, Extra };

struct StepVerdict {
  int index = 0;  // 1-based; candidate order for match/wrong/extra, gold order for missing
  StepStatus status = StepStatus::Match;
};

struct ProgramMatch {
  int tp = 0;
  int fp = 0;
  int fn_ = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::vector<StepVerdict> per_step;
};

// Order-sensitive LCS alignment over whole-step keys. A candidate step is a
// true positive iff the aligned gold step matches in module name, argument
// name set and argument values; variable references compare by the module
// name of their defining command, reals within 1e-9, timestamps exactly.
ProgramMatch match_programs(const StProgram& candidate, const StProgram& gold);

struct ConstraintCheck {
  std::string description;
  std::string field;       // component-style name located in the answer
  std::string comparator;  // <=, >=, <, >, ==, !=
  double value = 0.0;
};

struct ComponentSpec {
  std::string name;
  std::variant<double, std::string> expected;
  double tolerance = 0.0;  // numeric comparisons; 0 means exact
  std::vector<std::string> synonyms;
};

struct GroundTruth {
  std::vector<ConstraintCheck> constraints;
  std::vector<ComponentSpec> components;
  std::string reference_answer;
};

// Token-chain lookup: every whitespace token of `name` must appear in order
// (case-insensitive, word-aligned), then the first number after the last
// token is returned.
std::optional<double> extract_number_near(const std::string& answer, const std::string& name);
bool text_appears_near(const std::string& answer, const std::string& name,
                       const std::string& expected);

struct ScoreDetail {
  int score01 = 0;             // constraint verdict
  double ratio = 0.0;          // factuality ratio
  std::string detail;
  std::vector<std::string> per_item;
};

// Binary constraint adherence. Rule path extracts each check's field from the
// answer; judge path renders `prompt_template` ({query}/{answer}/
// {ground_truth} slots) and parses True/False.
ScoreDetail score_constraint(const std::string& answer, const GroundTruth& truth,
                             CompletionBackend* judge = nullptr,
                             const std::string& prompt_template = "",
                             const std::string& query = "");

// Ratio of expected components found (and numerically within tolerance).
ScoreDetail score_factuality(const std::string& answer, const GroundTruth& truth,
                             CompletionBackend* judge = nullptr,
                             const std::string& prompt_template = "",
                             const std::string& query = "");

// 3-point coherence; judge-only. Out-of-range verdicts retry once, then
// UnparseableVerdict.
int score_coherence(const std::string& answer, CompletionBackend& judge,
                    const std::string& prompt_template = "", const std::string& query = "");

struct ForecastError {
  double mae = 0.0;
  double rmse = 0.0;
};

ForecastError forecast_error(const std::vector<double>& preds, const std::vector<double>& truth);

// Baseline repair before error scoring: empty -> zeros, short -> last value
// repeated, full -> unchanged, longer -> TooManyPredictions.
std::vector<double> postprocess_baseline(const std::vector<double>& preds, int horizon_steps);

// Shipped judge prompt templates (also written under config/prompts/).
const char* default_constraint_prompt();
const char* default_factuality_prompt();
const char* default_coherence_prompt();

std::string render_prompt_template(const std::string& tmpl, const std::string& query,
                                   const std::string& answer, const std::string& ground_truth);

}  // namespace streason
