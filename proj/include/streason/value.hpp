#pragma once

#include <string>
#include <variant>

#include "streason/analysis.hpp"
#include "streason/datahub.hpp"
#include "streason/inference.hpp"
#include "streason/narration.hpp"

namespace streason {

struct NoneValue {
  bool operator==(const NoneValue&) const = default;
};

struct TextValue {
  std::string text;
  bool operator==(const TextValue&) const = default;
};

// Everything a command may bind.
using Value = std::variant<NoneValue, double, TextValue, Frame, TemporalAux, PredictionSeries,
                           TrendReport, SeasonalityReport, NeighbourhoodReport, AnomalyReport,
                           SensitivityReport, Explanation>;

const char* value_kind_name(const Value& v);
std::string value_brief(const Value& v);  // one-line description for rationales

// Final-answer rendering: Explanations as headed prose, prediction series as a
// timestamped table, reports as their summary, text/scalars directly. Frames
// and aux data raise UnrenderableValue (a program that ends on one is
// malformed).
std::string refine_output(const Value& v);

}  // namespace streason
