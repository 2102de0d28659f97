#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streason/analysis.hpp"
#include "streason/datahub.hpp"

namespace streason {

struct PredictionSeries {
  Timestamp start{};    // first predicted step
  int time_int = 0;     // minutes
  std::vector<double> values;
  std::string model_name;
  std::vector<bool> clamped_mask;  // same length; true where clamping changed the value

  Timestamp time_at(std::size_t i) const {
    return start.plus_minutes(static_cast<std::int64_t>(i) * time_int);
  }
};

struct AnomalyRecord {
  Timestamp time{};
  double observed = 0.0;
  double expected = 0.0;
  double z = 0.0;
  std::string classification;  // local | regional
  std::string note;
};

struct AnomalyReport {
  std::vector<AnomalyRecord> anomalies;
  std::string method;
  std::string summary;
};

struct TemporalElasticity {
  int lag_minutes = 0;
  double elasticity = 0.0;
};

struct SpatialElasticity {
  std::string sensor_id;
  double elasticity = 0.0;
};

struct SensitivityReport {
  std::vector<TemporalElasticity> temporal;
  std::vector<SpatialElasticity> spatial;
  double perturbation_percent = 5.0;
  std::string summary;
};

// A forecaster maps (history frame, horizon steps) to one value per step.
// Column 0 is the target; baselines are univariate and ignore the rest.
using Forecaster = std::function<std::vector<double>(const Frame&, int)>;

class ForecasterRegistry {
public:
  static ForecasterRegistry& instance();
  void register_model(const std::string& name, Forecaster fn, bool replace = false);
  const Forecaster* find(const std::string& name) const;

private:
  std::map<std::string, Forecaster> models_;
};

std::vector<double> seasonal_naive_forecast(const Frame& history, int steps);
std::vector<double> ar_least_squares_forecast(const Frame& history, int steps);
std::vector<double> persistence_forecast(const Frame& history, int steps);

struct ForecastRequest {
  int horizon = 1;
  std::string horizon_unit = "minutes";
  std::string model = "auto";  // auto dispatches on history length
};

// Default dispatch: seasonal-naive when the history covers one daily period,
// else AR least-squares of order min(6, n-1), else persistence.
PredictionSeries forecast(const Frame& data, const ForecastRequest& req);

struct ConstraintResult {
  std::optional<PredictionSeries> preds;
  std::optional<Frame> frame;
};

// "max"/"min" clamp a prediction series against constraint_val; "weekdays"/
// "weekends" row-filter a frame; "none"/empty passes the input through.
ConstraintResult impose_constraints(const std::optional<Frame>& data,
                                    const std::optional<PredictionSeries>& preds,
                                    const std::string& constraint,
                                    std::optional<double> constraint_val);

struct AnomalyOptions {
  double z_threshold = 3.0;
  double neighbour_z_threshold = 2.0;
  double regional_fraction = 0.5;  // neighbours above threshold => regional
  bool temporal_reasoning = false;
  bool spatial_reasoning = false;
};

// Per time-of-day-slot median baseline with MAD-scaled residuals; anomalies
// where |z| exceeds the threshold.
AnomalyReport detect_anomaly(const Frame& data, const Frame* spatial_aux,
                             const TemporalAux* temp_aux, const AnomalyOptions& opts);

struct SensitivityOptions {
  double perturbation = 0.05;  // +5% multiplicative
  int temporal_lags = 3;       // most recent inputs to perturb
};

// Elasticity of the mean prediction with respect to single-input (temporal)
// and whole-column (spatial) perturbations, re-forecasting each time.
SensitivityReport sensitivity_analysis(const Frame& data, const PredictionSeries& preds,
                                       const ForecastRequest& req,
                                       const SensitivityOptions& opts = {});

}  // namespace streason
