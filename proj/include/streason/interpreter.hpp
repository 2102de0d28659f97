#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streason/backend.hpp"
#include "streason/stprogram.hpp"
#include "streason/value.hpp"

namespace streason {

// Every tunable the modules consult. One execution carries one context.
struct ExecContext {
  std::string data_root;
  std::string forecaster = "auto";
  int knn = 4;
  AnomalyOptions anomaly;
  SensitivityOptions sensitivity;
  bool deterministic = true;
  CompletionBackend* polish_backend = nullptr;  // non-null enables prose polish
};

struct Environment {
  std::map<std::string, Value> bindings;
  std::vector<RationaleEntry> rationale;
};

struct StepTiming {
  int step_index = 0;
  std::string module_name;
  double millis = 0.0;
};

struct ExecutionResult {
  std::string answer;
  std::string rationale;
  Environment environment;
  std::vector<StepTiming> timings;
};

// Resolves one command's arguments against the environment, coercing literals
// to the kind each getter asks for. Integer literals promote to real; text
// literals matching the timestamp pattern promote to timestamps; everything
// else is strict (TypeMismatch).
class ArgView {
public:
  ArgView(const Command& cmd, const std::map<std::string, Value>& bindings);

  bool has(const std::string& name) const;  // supplied with a non-none value

  std::string text(const std::string& name) const;
  std::optional<std::string> text_opt(const std::string& name) const;
  std::int64_t integer(const std::string& name) const;
  std::optional<std::int64_t> integer_opt(const std::string& name) const;
  double real(const std::string& name) const;
  std::optional<double> real_opt(const std::string& name) const;
  Timestamp timestamp(const std::string& name) const;
  const Frame& frame(const std::string& name) const;
  const Frame* frame_opt(const std::string& name) const;
  const PredictionSeries& series(const std::string& name) const;
  const PredictionSeries* series_opt(const std::string& name) const;
  const TemporalAux* temporal_aux_opt(const std::string& name) const;
  const TrendReport* trend_opt(const std::string& name) const;
  const SeasonalityReport* seasonality_opt(const std::string& name) const;
  const NeighbourhoodReport* neighbourhood_opt(const std::string& name) const;
  const SensitivityReport* sensitivity_opt(const std::string& name) const;
  // Bound value of a VarRef, or a literal materialized as text/scalar/none.
  Value raw(const std::string& name) const;

  const Command& command() const { return cmd_; }

private:
  const ArgValue* find(const std::string& name) const;
  const Value* bound(const std::string& name) const;  // resolves VarRefs
  [[noreturn]] void mismatch(const std::string& name, const char* wanted) const;

  const Command& cmd_;
  const std::map<std::string, Value>& bindings_;
};

using ModuleFn = std::function<Value(const ArgView&, const ExecContext&)>;

class Interpreter {
public:
  Interpreter();  // the twelve built-ins come pre-registered

  void register_module(const std::string& name, ModuleFn fn, bool replace = false);
  std::size_t module_count() const { return table_.size(); }
  bool has_module(const std::string& name) const { return table_.count(name) > 0; }

  // Precondition: validate_against_pool(program, pool) is empty. Fail-fast:
  // the first failing step raises StepError and later steps do not run. When
  // `partial` is given it receives the state of the completed steps even on
  // failure (the CLI renders the partial rationale from it).
  ExecutionResult execute(const StProgram& program, const FunctionPool& pool,
                          const ExecContext& ctx, ExecutionResult* partial = nullptr) const;

private:
  std::map<std::string, ModuleFn> table_;
};

}  // namespace streason
