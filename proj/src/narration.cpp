#include "streason/narration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "streason/backend.hpp"
#include "streason/errors.hpp"
#include "streason/util.hpp"
#include "streason/value.hpp"

namespace streason {

namespace {

// Keeps the body text and the components map in lockstep: every number that
// reaches the prose goes through put().
class SectionWriter {
public:
  explicit SectionWriter(std::map<std::string, ComponentValue>& components)
      : components_(components) {}

  void line(const std::string& text) {
    body_ += text;
    body_ += '\n';
  }

  std::string number(const std::string& component, double v) {
    double canon = printed_value(v);
    components_[component] = canon;
    return format_number(canon);
  }

  std::string text(const std::string& component, const std::string& v) {
    components_[component] = v;
    return v;
  }

  std::string take() {
    std::string out = std::move(body_);
    if (!out.empty() && out.back() == '\n') out.pop_back();
    body_.clear();
    return out;
  }

private:
  std::map<std::string, ComponentValue>& components_;
  std::string body_;
};

}  // namespace

Explanation gen_explanation(const ExplanationInputs& in) {
  if (!in.trend && !in.seasonality && !in.neighbourhood && !in.preds && !in.sensitivity)
    throw Error(ErrKind::MissingInputs, "no report, prediction or sensitivity input supplied");

  Explanation expl;
  SectionWriter w(expl.components);

  {
    std::ostringstream os;
    os << "Task: " << w.text("task", in.task) << ". Feature: " << w.text("feature", in.feature)
       << ". Location: " << w.text("location", in.location) << ". Region: "
       << w.text("region", in.region) << ". Interval minutes: "
       << w.number("interval minutes", in.time_int) << ".";
    w.line(os.str());
    if (in.data && in.data->rows() > 0) {
      std::ostringstream ws;
      ws << "Window: " << format_timestamp(in.data->start()) << " to "
         << format_timestamp(in.data->end()) << ". Window rows: "
         << w.number("window rows", static_cast<double>(in.data->rows())) << ".";
      w.line(ws.str());
    }
    expl.sections.push_back({"Context", w.take()});
  }

  if (in.trend) {
    const auto& t = *in.trend;
    std::ostringstream os;
    os << "Trend slope: " << w.number("trend slope", t.slope) << " per hour. Trend p-value: "
       << w.number("trend p-value", t.p_value) << ". Trend direction: "
       << w.text("trend direction", t.direction) << ". Points analysed: "
       << w.number("points analysed", static_cast<double>(t.n_points)) << ".";
    w.line(os.str());
    expl.sections.push_back({"Trend", w.take()});
  }

  if (in.seasonality) {
    const auto& s = *in.seasonality;
    std::ostringstream os;
    os << "Daily seasonality strength: " << w.number("daily seasonality strength", s.daily_strength)
       << ". Weekly seasonality strength: "
       << w.number("weekly seasonality strength", s.weekly_strength) << ".";
    if (s.dominant_period_minutes)
      os << " Dominant period minutes: "
         << w.number("dominant period minutes", *s.dominant_period_minutes) << ".";
    else
      os << " No dominant period.";
    w.line(os.str());
    expl.sections.push_back({"Seasonality", w.take()});
  }

  if (in.neighbourhood) {
    const auto& nb = *in.neighbourhood;
    std::ostringstream os;
    os << "Neighbours analysed: "
       << w.number("neighbours analysed", static_cast<double>(nb.neighbours.size())) << ".";
    w.line(os.str());
    int idx = 1;
    for (const auto& n : nb.neighbours) {
      std::string tag = "neighbour " + std::to_string(idx);
      std::ostringstream ls;
      ls << "Neighbour " << idx << ": sensor " << w.text(tag, n.sensor_id) << ", distance "
         << w.number(tag + " distance", n.distance_km) << " km, correlation "
         << w.number(tag + " correlation", n.correlation) << ".";
      w.line(ls.str());
      ++idx;
    }
    expl.sections.push_back({"Neighbourhood", w.take()});
  }

  if (in.preds) {
    const auto& p = *in.preds;
    std::ostringstream os;
    os << "Forecast model: " << w.text("forecast model", p.model_name) << ". Forecast steps: "
       << w.number("forecast steps", static_cast<double>(p.values.size()))
       << ". Step interval minutes: " << w.number("step interval minutes", p.time_int) << ".";
    if (in.horizon)
      os << " Forecast horizon: " << w.number("forecast horizon", static_cast<double>(*in.horizon))
         << " " << in.horizon_unit << ".";
    w.line(os.str());
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      std::ostringstream ls;
      ls << "Prediction " << (i + 1) << " (" << format_timestamp(p.time_at(i)) << "): "
         << w.number("prediction " + std::to_string(i + 1), p.values[i]) << ".";
      w.line(ls.str());
    }
    if (!p.values.empty()) {
      auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
      std::ostringstream ls;
      ls << "Maximum predicted value: " << w.number("maximum predicted value", *hi)
         << ". Minimum predicted value: " << w.number("minimum predicted value", *lo) << ".";
      w.line(ls.str());
    }
    expl.sections.push_back({"Predictions", w.take()});
  }

  if (in.sensitivity) {
    const auto& s = *in.sensitivity;
    w.line("Perturbation percent: " + w.number("perturbation percent", s.perturbation_percent) +
           ".");
    for (const auto& t : s.temporal) {
      std::string tag = "elasticity at lag " + std::to_string(t.lag_minutes) + " minutes";
      w.line("Elasticity at lag " + std::to_string(t.lag_minutes) + " minutes: " +
             w.number(tag, t.elasticity) + ".");
    }
    for (const auto& sp : s.spatial) {
      std::string tag = "elasticity for neighbour " + sp.sensor_id;
      w.line("Elasticity for neighbour " + sp.sensor_id + ": " + w.number(tag, sp.elasticity) +
             ".");
    }
    expl.sections.push_back({"Sensitivity", w.take()});
  }

  if (!in.constraint.empty() && in.constraint != "none") {
    std::ostringstream os;
    os << "Applied constraint: " << w.text("applied constraint", in.constraint) << ".";
    if (in.constraint_val)
      os << " Constraint threshold: " << w.number("constraint threshold", *in.constraint_val)
         << ".";
    if (in.preds) {
      std::size_t clamped = 0;
      for (bool b : in.preds->clamped_mask) clamped += b ? 1 : 0;
      os << " Clamped predictions: "
         << w.number("clamped predictions", static_cast<double>(clamped)) << " of "
         << format_number(static_cast<double>(in.preds->values.size())) << ".";
    } else {
      os << " Rows were filtered to matching days before analysis.";
    }
    w.line(os.str());
    expl.sections.push_back({"Constraints", w.take()});
  }

  {
    std::ostringstream os;
    os << "The " << in.task << " of " << in.feature << " at " << in.location << " is complete.";
    if (in.trend) os << " The series is " << in.trend->direction << " over the window.";
    if (in.seasonality)
      os << (in.seasonality->dominant_period_minutes
                 ? std::string(" A dominant seasonal cycle is present.")
                 : std::string(" No dominant seasonal cycle was found."));
    if (in.preds && !in.constraint.empty() && in.constraint != "none")
      os << " All reported predictions respect the stated constraint.";
    w.line(os.str());
    expl.sections.push_back({"Synthesis", w.take()});
  }

  return expl;
}

std::string render_explanation(const Explanation& expl) {
  std::string out;
  for (const auto& s : expl.sections) {
    out += s.heading;
    out += '\n';
    out.append(s.heading.size(), '-');
    out += '\n';
    out += s.body;
    out += "\n\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string compile_rationale(const std::vector<RationaleEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += "Step " + std::to_string(e.step_index) + ": " + e.module_name + "\n";
    out += "  Inputs: " + e.inputs_summary + "\n";
    out += "  Output: " + e.outputs_summary + "\n";
    if (&e != &entries.back()) out += "\n";
  }
  return out;
}

bool polish_explanation(Explanation& expl, CompletionBackend& backend) {
  std::string original = render_explanation(expl);
  std::string prompt =
      "Rewrite the following analytical answer so it reads as flowing prose. Keep every "
      "numeric value exactly as written, do not round, drop or add numbers, and keep the "
      "section order.\n\n" +
      original;
  std::string polished;
  try {
    polished = backend.complete(prompt);
  } catch (const Error&) {
    return false;
  }
  if (trim(polished).empty()) return false;
  for (const auto& [name, value] : expl.components) {
    std::string needle;
    if (const double* d = std::get_if<double>(&value))
      needle = format_number(*d);
    else
      needle = std::get<std::string>(value);
    if (polished.find(needle) == std::string::npos) return false;  // fall back
  }
  expl.sections = {{"Answer", trim(polished)}};
  return true;
}

const char* value_kind_name(const Value& v) {
  struct Visitor {
    const char* operator()(const NoneValue&) const { return "none"; }
    const char* operator()(double) const { return "scalar"; }
    const char* operator()(const TextValue&) const { return "text"; }
    const char* operator()(const Frame&) const { return "frame"; }
    const char* operator()(const TemporalAux&) const { return "temporal_aux"; }
    const char* operator()(const PredictionSeries&) const { return "prediction_series"; }
    const char* operator()(const TrendReport&) const { return "trend_report"; }
    const char* operator()(const SeasonalityReport&) const { return "seasonality_report"; }
    const char* operator()(const NeighbourhoodReport&) const { return "neighbourhood_report"; }
    const char* operator()(const AnomalyReport&) const { return "anomaly_report"; }
    const char* operator()(const SensitivityReport&) const { return "sensitivity_report"; }
    const char* operator()(const Explanation&) const { return "explanation"; }
  };
  return std::visit(Visitor{}, v);
}

std::string value_brief(const Value& v) {
  struct Visitor {
    std::string operator()(const NoneValue&) const { return "none"; }
    std::string operator()(double d) const { return "scalar " + format_number(d); }
    std::string operator()(const TextValue& t) const {
      return "text (" + std::to_string(t.text.size()) + " chars)";
    }
    std::string operator()(const Frame& f) const { return f.brief(); }
    std::string operator()(const TemporalAux& a) const {
      return "TemporalAux[" + std::to_string(a.rows()) + "] " + a.variable;
    }
    std::string operator()(const PredictionSeries& p) const {
      return "PredictionSeries[" + std::to_string(p.values.size()) + "] " + p.model_name;
    }
    std::string operator()(const TrendReport& r) const {
      return "TrendReport direction=" + r.direction;
    }
    std::string operator()(const SeasonalityReport& r) const {
      return "SeasonalityReport daily=" + format_number(r.daily_strength);
    }
    std::string operator()(const NeighbourhoodReport& r) const {
      return "NeighbourhoodReport neighbours=" + std::to_string(r.neighbours.size());
    }
    std::string operator()(const AnomalyReport& r) const {
      return "AnomalyReport anomalies=" + std::to_string(r.anomalies.size());
    }
    std::string operator()(const SensitivityReport& r) const {
      return "SensitivityReport lags=" + std::to_string(r.temporal.size()) +
             " neighbours=" + std::to_string(r.spatial.size());
    }
    std::string operator()(const Explanation& e) const {
      return "Explanation sections=" + std::to_string(e.sections.size());
    }
  };
  return std::visit(Visitor{}, v);
}

std::string refine_output(const Value& v) {
  struct Visitor {
    std::string operator()(const Explanation& e) const { return render_explanation(e); }
    std::string operator()(const PredictionSeries& p) const {
      std::string out = "timestamp            value\n";
      for (std::size_t i = 0; i < p.values.size(); ++i)
        out += format_timestamp(p.time_at(i)) + "  " + format_number(p.values[i]) + "\n";
      if (!out.empty()) out.pop_back();
      return out;
    }
    std::string operator()(const TrendReport& r) const { return r.summary; }
    std::string operator()(const SeasonalityReport& r) const { return r.summary; }
    std::string operator()(const NeighbourhoodReport& r) const { return r.summary; }
    std::string operator()(const AnomalyReport& r) const { return r.summary; }
    std::string operator()(const SensitivityReport& r) const { return r.summary; }
    std::string operator()(const TextValue& t) const { return t.text; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const Frame& f) const {
      throw Error(ErrKind::Unrenderable, "a raw frame is not a final answer (" + f.brief() + ")");
    }
    std::string operator()(const TemporalAux&) const {
      throw Error(ErrKind::Unrenderable, "temporal aux data is not a final answer");
    }
    std::string operator()(const NoneValue&) const {
      throw Error(ErrKind::Unrenderable, "none is not a final answer");
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace streason
