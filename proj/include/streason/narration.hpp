#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "streason/analysis.hpp"
#include "streason/inference.hpp"

namespace streason {

using ComponentValue = std::variant<double, std::string>;

struct ExplanationSection {
  std::string heading;
  std::string body;
  bool operator==(const ExplanationSection&) const = default;
};

// Long-form answer. `components` names every quantitative result the body
// mentions; the factuality metric scores answers against exactly this map.
struct Explanation {
  std::vector<ExplanationSection> sections;
  std::map<std::string, ComponentValue> components;
  bool operator==(const Explanation&) const = default;
};

struct RationaleEntry {
  int step_index = 0;  // 1-based program order
  std::string module_name;
  std::string inputs_summary;
  std::string outputs_summary;
};

struct ExplanationInputs {
  std::string task;
  std::string feature;
  std::string location;
  std::string region;
  int time_int = 0;
  std::optional<std::int64_t> horizon;
  std::string horizon_unit;
  std::string constraint;
  std::optional<double> constraint_val;
  const Frame* data = nullptr;
  const TrendReport* trend = nullptr;
  const SeasonalityReport* seasonality = nullptr;
  const NeighbourhoodReport* neighbourhood = nullptr;
  const PredictionSeries* preds = nullptr;
  const SensitivityReport* sensitivity = nullptr;
};

// Deterministic template assembly: context, one section per supplied report,
// a constraints section when a constraint is present, and a closing
// synthesis. MissingInputs when no report at all is supplied.
Explanation gen_explanation(const ExplanationInputs& in);

std::string render_explanation(const Explanation& expl);

std::string compile_rationale(const std::vector<RationaleEntry>& entries);

class CompletionBackend;

// Optional LLM rewrite of the prose. Every component value must survive
// verbatim; otherwise the deterministic text is kept. Returns true when the
// polished text was accepted.
bool polish_explanation(Explanation& expl, CompletionBackend& backend);

}  // namespace streason
