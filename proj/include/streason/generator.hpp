#pragma once

#include <optional>
#include <string>
#include <vector>

#include "streason/backend.hpp"
#include "streason/stprogram.hpp"

namespace streason {

enum class TaskTag { Analysis, Anomaly, Prediction };

const char* task_tag_name(TaskTag t);
std::optional<TaskTag> task_tag_from_name(std::string_view s);

struct ExamplePair {
  std::string query;
  std::string program_text;
  TaskTag task_tag = TaskTag::Analysis;
};

std::vector<ExamplePair> load_example_pool(const std::string& path);
void save_example_pool(const std::vector<ExamplePair>& pool, const std::string& path);

enum class SelectionVariant { Equal, Random, Include, Exclude };

const char* selection_variant_name(SelectionVariant v);
std::optional<SelectionVariant> selection_variant_from_name(std::string_view s);

struct PromptConfig {
  int n_examples = 6;
  SelectionVariant variant = SelectionVariant::Equal;
  double include_fraction = 0.20;
  bool use_function_pool = true;
  std::uint64_t seed = 0;
};

// Equal: n/3 per tag, leftovers round-robin starting at the query's tag
// (counts stay within +-1). Random: uniform without replacement. Include:
// ceil(fraction*n) from the query's tag, the rest from the other tags.
// Exclude: uniform from the pool minus the query's tag. PoolExhausted when a
// variant cannot fill the request.
std::vector<ExamplePair> select_examples(const std::vector<ExamplePair>& pool, TaskTag query_task,
                                         const PromptConfig& cfg);

std::string build_prompt(const std::string& query, const std::vector<ExamplePair>& examples,
                         const FunctionPool& pool, const PromptConfig& cfg);

struct GenerationRecord {
  std::string query;
  std::string prompt;
  std::string raw_completion;
  std::optional<StProgram> program;   // nullopt when parsing failed
  std::string parse_error;            // message when program is nullopt
  std::vector<ValidationIssue> issues;
  std::string backend_name;
};

// Prompt -> completion -> first program block -> parse + validate. Validation
// issues are recorded, not fatal. EmptyCompletion when no program block can be
// found; BackendError after the retry budget is spent.
GenerationRecord generate_program(const std::string& query, TaskTag query_task,
                                  const std::vector<ExamplePair>& example_pool,
                                  const FunctionPool& pool, const PromptConfig& cfg,
                                  CompletionBackend& backend);

// First run of consecutive command-grammar lines in a completion, fenced or
// bare. Empty when none.
std::string extract_program_block(const std::string& completion);

}  // namespace streason
