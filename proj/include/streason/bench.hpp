#pragma once

#include <optional>
#include <string>
#include <vector>

#include "streason/evalkit.hpp"
#include "streason/generator.hpp"
#include "streason/interpreter.hpp"

namespace streason {

struct BenchInstance {
  std::string id;
  TaskTag task = TaskTag::Analysis;
  std::string query;
  std::string gold_program;
  GroundTruth ground_truth;
};

std::vector<BenchInstance> load_instances(const std::string& path);
void save_instances(const std::vector<BenchInstance>& instances, const std::string& path);

struct InstanceResult {
  std::string id;
  TaskTag task = TaskTag::Analysis;
  ProgramMatch match;
  int constraint_score = 0;
  std::string constraint_detail;
  double factuality_score = 0.0;
  std::string factuality_detail;
  std::optional<int> coherence_score;
  std::optional<ForecastError> forecast;
  std::string answer;
  std::string error;  // empty on success
};

struct Aggregate {
  int instances = 0;
  double constraint_pct = 0.0;
  double factuality_pct = 0.0;
  std::optional<double> coherence_pct;  // score/3 * 100, judge runs only
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> mae;
  std::optional<double> rmse;
};

struct BenchReport {
  std::vector<InstanceResult> results;
  Aggregate overall;
  std::vector<std::pair<std::string, Aggregate>> per_task;

  std::string summary_table() const;  // delimited text table
};

struct BenchOptions {
  ExecContext ctx;
  PromptConfig prompt;
  CompletionBackend* generator_backend = nullptr;  // null: execute gold programs
  CompletionBackend* judge = nullptr;              // null: rule-based scoring
  std::string constraint_prompt;  // template overrides; empty uses defaults
  std::string factuality_prompt;
  std::string coherence_prompt;
  int jobs = 1;
};

// Per-instance failures are recorded in the result, never propagated; a bench
// run always completes.
BenchReport run_bench(const std::vector<BenchInstance>& instances, const FunctionPool& pool,
                      const std::vector<ExamplePair>& example_pool, const Interpreter& interp,
                      const BenchOptions& opts);

void save_report(const BenchReport& report, const std::string& path);

// The desk-scale benchmark: 30 instances (10 per task) over the seed-42
// synthetic dataset rooted at `data_root`. Ground truth is harvested from
// gold-program execution, so the suite is self-consistent by construction.
std::vector<BenchInstance> make_default_bench(const std::string& data_root,
                                              const FunctionPool& pool,
                                              const Interpreter& interp);

// Fixture file replaying each instance's gold program verbatim.
void save_bench_fixtures(const std::vector<BenchInstance>& instances, const std::string& path);

// Canonical gold-program texts (also shipped under golden/).
std::string golden_analysis_program();
std::string golden_anomaly_program();
std::string golden_forecast_program();

// The shipped in-context corpus: 21 query-program pairs, 7 per task, disjoint
// from the benchmark instances. Also written to config/example_pool.json.
std::vector<ExamplePair> default_example_pool();

// Ground truth for an executed program: Explanation components (or anomaly
// report fields) plus any max/min clamp as a machine-checkable constraint.
GroundTruth harvest_ground_truth(const StProgram& program, const ExecutionResult& result);

}  // namespace streason
