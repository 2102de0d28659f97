#include "streason/registry.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "streason/errors.hpp"

namespace streason {

const char* param_kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::Text: return "text";
    case ParamKind::Integer: return "integer";
    case ParamKind::Real: return "real";
    case ParamKind::Timestamp: return "timestamp";
    case ParamKind::Frame: return "frame";
    case ParamKind::Series: return "series";
    case ParamKind::Report: return "report";
    case ParamKind::Any: return "any";
  }
  return "any";
}

const char* param_kind_prompt_name(ParamKind k) {
  switch (k) {
    case ParamKind::Text: return "str";
    case ParamKind::Integer: return "int";
    case ParamKind::Real: return "float";
    case ParamKind::Timestamp: return "datetime";
    case ParamKind::Frame: return "DataFrame";
    case ParamKind::Series: return "PredictionSeries";
    case ParamKind::Report: return "Report";
    case ParamKind::Any: return "Any";
  }
  return "Any";
}

std::optional<ParamKind> param_kind_from_name(std::string_view s) {
  static const std::pair<const char*, ParamKind> table[] = {
      {"text", ParamKind::Text},           {"integer", ParamKind::Integer},
      {"real", ParamKind::Real},           {"timestamp", ParamKind::Timestamp},
      {"frame", ParamKind::Frame},         {"series", ParamKind::Series},
      {"report", ParamKind::Report},       {"any", ParamKind::Any},
  };
  for (auto& [name, kind] : table)
    if (s == name) return kind;
  return std::nullopt;
}

const ParamSpec* FunctionSpec::find_param(std::string_view pname) const {
  for (const auto& p : params)
    if (p.name == pname) return &p;
  return nullptr;
}

std::string FunctionSpec::signature() const {
  std::string s = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s += ", ";
    s += params[i].name;
  }
  s += ")";
  return s;
}

void FunctionPool::add(FunctionSpec spec) {
  if (index_.count(spec.name))
    throw Error(ErrKind::Format, "duplicate function name " + spec.name);
  for (std::size_t i = 0; i < spec.params.size(); ++i)
    for (std::size_t j = i + 1; j < spec.params.size(); ++j)
      if (spec.params[i].name == spec.params[j].name)
        throw Error(ErrKind::Format,
                    "duplicate parameter " + spec.params[i].name + " in " + spec.name);
  index_[spec.name] = specs_.size();
  specs_.push_back(std::move(spec));
}

const FunctionSpec* FunctionPool::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &specs_[it->second];
}

namespace {

ParamSpec req(std::string name, ParamKind kind, std::string desc) {
  return {std::move(name), kind, true, std::move(desc)};
}

ParamSpec opt(std::string name, ParamKind kind, std::string desc) {
  return {std::move(name), kind, false, std::move(desc)};
}

}  // namespace

FunctionPool default_pool() {
  FunctionPool pool;

  pool.add({"LOAD_SPATIOTEMPORAL_DATA",
            "Loads spatiotemporal data for a specific location and time period.",
            {req("location", ParamKind::Text, "The geographical location identifier."),
             req("time", ParamKind::Timestamp, "The current time."),
             req("feature", ParamKind::Text,
                 "Feature of interest (e.g., 'traffic speed', 'air quality')."),
             req("region", ParamKind::Text, "The broader geographical area."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             req("period", ParamKind::Integer, "Duration for which data is loaded."),
             req("unit", ParamKind::Text, "The time unit of the period (e.g., 'hours', 'days')."),
             req("task", ParamKind::Text,
                 "Task of the query (e.g., 'analysis', 'anomaly detection', 'prediction').")},
            "DataFrame containing spatiotemporal data."});

  pool.add({"LOAD_SPATIAL_AUX_DATA",
            "Loads auxiliary spatial data such as neighbourhood data to support spatial "
            "reasoning in tasks.",
            {req("spatial_var", ParamKind::Text, "Spatial auxiliary variable to load."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("time", ParamKind::Timestamp, "The current time."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("region", ParamKind::Text, "The broader geographical area."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             req("period", ParamKind::Integer, "Duration for which data is loaded."),
             req("unit", ParamKind::Text, "The time unit of the period."),
             opt("constraint", ParamKind::Text, "Optional filter applied to the loaded data.")},
            "DataFrame of neighbouring sensors' values over the same window."});

  pool.add({"LOAD_TEMPORAL_AUX_DATA",
            "Loads auxiliary temporal data such as weather data to support temporal "
            "reasoning in tasks.",
            {req("temp_var", ParamKind::Text, "Temporal auxiliary variable to load."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("time", ParamKind::Timestamp, "The current time."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("region", ParamKind::Text, "The broader geographical area."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             req("period", ParamKind::Integer, "Duration for which data is loaded."),
             req("unit", ParamKind::Text, "The time unit of the period."),
             opt("constraint", ParamKind::Text, "Optional filter applied to the loaded data.")},
            "Temporal auxiliary series aligned to the data grid."});

  pool.add({"IMPOSE_CONSTRAINTS",
            "Applies data constraints relevant to analysis, prediction, or anomaly detection. "
            "It can filter the data or enforce threshold-based rules for predictive outputs.",
            {opt("data", ParamKind::Frame, "Data to filter for calendar constraints."),
             req("time", ParamKind::Timestamp, "The current time."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             req("period", ParamKind::Integer, "Duration of the data window."),
             req("unit", ParamKind::Text, "The time unit of the period."),
             req("task", ParamKind::Text, "Task of the query."),
             opt("constraint", ParamKind::Text,
                 "Constraint name: 'max', 'min', 'weekdays' or 'weekends'."),
             opt("constraint_val", ParamKind::Real, "Threshold value for 'max'/'min'."),
             opt("preds", ParamKind::Series, "Predictions to clamp against the threshold.")},
            "Clamped prediction series, or a row-filtered DataFrame."});

  pool.add({"ANALYZE_TREND",
            "Performs trend detection on the selected feature. Returns a text summary of "
            "the trend analysis.",
            {req("data", ParamKind::Frame, "Spatiotemporal data to analyse."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             opt("constraint", ParamKind::Text, "Row filter: 'weekdays' or 'weekends'."),
             opt("output_var", ParamKind::Text, "Label for the produced result.")},
            "Trend report with slope, significance and direction."});

  pool.add({"ANALYZE_SEASONALITY",
            "Analyzes seasonality patterns in the spatio-temporal data. Returns a text "
            "summary of the seasonality analysis.",
            {req("data", ParamKind::Frame, "Spatiotemporal data to analyse."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             opt("constraint", ParamKind::Text, "Row filter: 'weekdays' or 'weekends'.")},
            "Seasonality report with daily and weekly strengths."});

  pool.add({"ANALYZE_NEIGHBOURHOOD",
            "Examines the spatial surroundings of a location to analyze feature behavior in "
            "neighboring areas. Often used to detect localized anomalies or support spatial "
            "reasoning.",
            {req("feature", ParamKind::Text, "Feature of interest."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("region", ParamKind::Text, "The broader geographical area.")},
            "Neighbourhood report with distances and correlations."});

  pool.add({"GEN_EXPLANATION",
            "Generates a comprehensive narrative explaining the results based on trend, "
            "seasonality, neighborhood context, predictions, constraints, and sensitivity "
            "analysis.",
            {req("task", ParamKind::Text, "Task of the query."),
             opt("data", ParamKind::Frame, "Data the analysis was computed on."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("region", ParamKind::Text, "The broader geographical area."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             opt("horizon", ParamKind::Integer, "Forecast horizon length."),
             opt("horizon_unit", ParamKind::Text, "Unit of the forecast horizon."),
             opt("constraint", ParamKind::Text, "Constraint named in the query."),
             opt("constraint_val", ParamKind::Real, "Constraint threshold value."),
             opt("trend", ParamKind::Report, "Trend report to narrate."),
             opt("seasonality", ParamKind::Report, "Seasonality report to narrate."),
             opt("neighbourhood", ParamKind::Report, "Neighbourhood report to narrate."),
             opt("preds", ParamKind::Series, "Predictions to narrate."),
             opt("sensitivity", ParamKind::Report, "Sensitivity report to narrate.")},
            "Structured long-form explanation."});

  pool.add({"DETECT_ANOMALY_ST_DATA",
            "Identifies anomalies using both core and auxiliary data sources.",
            {req("data", ParamKind::Frame, "Spatiotemporal data to scan."),
             opt("spatial_aux_data", ParamKind::Frame, "Neighbour sensors' data."),
             opt("temp_aux_data", ParamKind::Any, "Temporal auxiliary data such as weather."),
             opt("temp_reasoning", ParamKind::Integer,
                 "1 to annotate anomalies with concurrent temporal-aux extremes."),
             opt("spatial_reasoning", ParamKind::Integer,
                 "1 to classify anomalies as local or regional using neighbours."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             opt("constraint", ParamKind::Text, "Optional row filter.")},
            "Anomaly report listing flagged timestamps."});

  pool.add({"FORECAST",
            "Performs forecasting on the selected feature based on historical data.",
            {req("data", ParamKind::Frame, "Historical data to forecast from."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("time", ParamKind::Timestamp, "The current time."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("region", ParamKind::Text, "The broader geographical area."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             req("period", ParamKind::Integer, "Duration of the history window."),
             req("unit", ParamKind::Text, "The time unit of the period."),
             req("horizon", ParamKind::Integer, "Forecast horizon length."),
             req("horizon_unit", ParamKind::Text, "Unit of the forecast horizon.")},
            "Prediction series covering the requested horizon."});

  pool.add({"CONDUCT_SENSITIVITY_ANALYSIS",
            "Analyzes how changes in input data influence the predictions, offering insights "
            "into both spatial and temporal sensitivity for more robust interpretations.",
            {req("data", ParamKind::Frame, "Historical data the forecast was made from."),
             req("preds", ParamKind::Series, "Predictions produced from the data."),
             req("location", ParamKind::Text, "The geographical location identifier."),
             req("time", ParamKind::Timestamp, "The current time."),
             req("feature", ParamKind::Text, "Feature of interest."),
             req("region", ParamKind::Text, "The broader geographical area."),
             req("time_int", ParamKind::Integer, "Interval in minutes between data points."),
             req("period", ParamKind::Integer, "Duration of the history window."),
             req("unit", ParamKind::Text, "The time unit of the period."),
             req("horizon", ParamKind::Integer, "Forecast horizon length."),
             req("horizon_unit", ParamKind::Text, "Unit of the forecast horizon.")},
            "Sensitivity report with temporal and spatial elasticities."});

  pool.add({"REFINE_OUTPUT",
            "Outputs the final result from any task in a standardized format. This can be a "
            "summary string, table, or numeric result depending on the task context.",
            {req("var", ParamKind::Any, "The value to render as the final answer.")},
            "Final answer text."});

  return pool;
}

std::string render_pool_prompt(const FunctionPool& pool) {
  std::ostringstream out;
  for (const auto& spec : pool.specs()) {
    out << spec.signature() << "\n";
    out << "  Description: " << spec.description << "\n";
    if (!spec.params.empty()) {
      out << "  Parameters:\n";
      for (const auto& p : spec.params) {
        out << "    - " << p.name << " (" << param_kind_prompt_name(p.kind) << ")";
        if (!p.required) out << " [optional]";
        if (!p.description.empty()) out << " - " << p.description;
        out << "\n";
      }
    }
    out << "  Returns: " << spec.returns << "\n\n";
  }
  return out.str();
}

namespace {

using nlohmann::json;

json pool_to_json(const FunctionPool& pool) {
  json functions = json::array();
  for (const auto& spec : pool.specs()) {
    json params = json::array();
    for (const auto& p : spec.params) {
      params.push_back({{"name", p.name},
                        {"kind", param_kind_name(p.kind)},
                        {"required", p.required},
                        {"description", p.description}});
    }
    functions.push_back({{"name", spec.name},
                         {"description", spec.description},
                         {"params", params},
                         {"returns", spec.returns}});
  }
  return {{"functions", functions}};
}

}  // namespace

FunctionPool load_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "cannot open pool file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, "pool file " + path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("functions") || !doc["functions"].is_array())
    throw Error(ErrKind::Format, "pool file must carry a top-level 'functions' list");
  FunctionPool pool;
  for (const auto& f : doc["functions"]) {
    FunctionSpec spec;
    try {
      spec.name = f.at("name").get<std::string>();
      spec.description = f.value("description", "");
      spec.returns = f.value("returns", "");
      for (const auto& p : f.at("params")) {
        ParamSpec ps;
        ps.name = p.at("name").get<std::string>();
        auto kind = param_kind_from_name(p.at("kind").get<std::string>());
        if (!kind)
          throw Error(ErrKind::Format, "unknown parameter kind '" +
                                           p.at("kind").get<std::string>() + "' in " + spec.name);
        ps.kind = *kind;
        ps.required = p.value("required", true);
        ps.description = p.value("description", "");
        spec.params.push_back(std::move(ps));
      }
    } catch (const json::exception& e) {
      throw Error(ErrKind::Format, std::string("pool entry: ") + e.what());
    }
    pool.add(std::move(spec));  // throws FormatError on duplicates
  }
  return pool;
}

void save_pool(const FunctionPool& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "cannot write pool file " + path);
  out << pool_to_json(pool).dump(2) << "\n";
}

}  // namespace streason
