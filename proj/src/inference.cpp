#include "streason/inference.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "streason/errors.hpp"
#include "streason/util.hpp"

namespace streason {

namespace {

// Target series with NaNs forward-filled (leading NaNs take the first valid
// value). Empty result means no usable history.
std::vector<double> clean_target(const Frame& history) {
  std::vector<double> out;
  out.reserve(history.rows());
  double last = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t r = 0; r < history.rows(); ++r) {
    double v = history.values(static_cast<Eigen::Index>(r), 0);
    if (!std::isnan(v)) last = v;
    out.push_back(last);
  }
  while (!out.empty() && std::isnan(out.front())) {
    auto first_valid = std::find_if(out.begin(), out.end(), [](double v) { return !std::isnan(v); });
    if (first_valid == out.end()) return {};
    std::fill(out.begin(), first_valid, *first_valid);
  }
  if (out.empty() || std::isnan(out.back())) return {};
  return out;
}

int daily_period_steps(const Frame& history) {
  return history.time_int > 0 ? 1440 / history.time_int : 0;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return (v[mid - 1] + hi) / 2.0;
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

std::vector<double> seasonal_naive_forecast(const Frame& history, int steps) {
  std::vector<double> series = clean_target(history);
  const int period = daily_period_steps(history);
  if (static_cast<int>(series.size()) < period || period <= 0)
    throw Error(ErrKind::InsufficientData, "seasonal-naive needs one full daily period");
  const std::size_t n = series.size();
  for (int i = 0; i < steps; ++i) series.push_back(series[n + i - period]);
  return {series.begin() + static_cast<std::ptrdiff_t>(n), series.end()};
}

std::int64_t ar_order(std::int64_t n) {
  // Capped so the normal equations stay overdetermined: an interpolating fit
  // on a short window diverges under recursive multi-step prediction.
  return std::min<std::int64_t>(6, std::max<std::int64_t>(1, (n - 1) / 2));
}

std::vector<double> ar_least_squares_forecast(const Frame& history, int steps) {
  std::vector<double> series = clean_target(history);
  const auto n = static_cast<std::int64_t>(series.size());
  if (n < 2) throw Error(ErrKind::InsufficientData, "AR needs at least 2 points");
  const std::int64_t p = ar_order(n);

  Eigen::MatrixXd design(n - p, p + 1);
  Eigen::VectorXd target(n - p);
  for (std::int64_t t = p; t < n; ++t) {
    design(t - p, 0) = 1.0;
    for (std::int64_t j = 1; j <= p; ++j) design(t - p, j) = series[t - j];
    target(t - p) = series[t];
  }
  // Minimum-norm least squares; the short-history design is often
  // rank-deficient and anything larger would be unstable.
  Eigen::VectorXd beta = design.completeOrthogonalDecomposition().solve(target);

  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    double v = beta(0);
    for (std::int64_t j = 1; j <= p; ++j) v += beta(j) * series[series.size() - j];
    series.push_back(v);
    out.push_back(v);
  }
  return out;
}

std::vector<double> persistence_forecast(const Frame& history, int steps) {
  std::vector<double> series = clean_target(history);
  if (series.empty()) throw Error(ErrKind::InsufficientData, "empty history");
  return std::vector<double>(static_cast<std::size_t>(steps), series.back());
}

ForecasterRegistry& ForecasterRegistry::instance() {
  static ForecasterRegistry reg = [] {
    ForecasterRegistry r;
    r.register_model("seasonal_naive",
                     [](const Frame& f, int s) { return seasonal_naive_forecast(f, s); });
    r.register_model("ar_ls",
                     [](const Frame& f, int s) { return ar_least_squares_forecast(f, s); });
    r.register_model("persistence",
                     [](const Frame& f, int s) { return persistence_forecast(f, s); });
    return r;
  }();
  return reg;
}

void ForecasterRegistry::register_model(const std::string& name, Forecaster fn, bool replace) {
  if (!replace && models_.count(name))
    throw Error(ErrKind::DuplicateModule, "forecaster " + name + " already registered");
  models_[name] = std::move(fn);
}

const Forecaster* ForecasterRegistry::find(const std::string& name) const {
  auto it = models_.find(name);
  return it == models_.end() ? nullptr : &it->second;
}

PredictionSeries forecast(const Frame& data, const ForecastRequest& req) {
  if (req.horizon < 1) throw Error(ErrKind::Config, "horizon must be >= 1");
  std::vector<double> series = clean_target(data);
  if (series.empty()) throw Error(ErrKind::InsufficientData, "empty forecast history");
  const std::int64_t horizon_min = period_to_minutes(req.horizon, req.horizon_unit);
  const int steps = static_cast<int>(horizon_min / data.time_int);
  if (steps < 1)
    throw Error(ErrKind::Config, "horizon shorter than one interval");

  PredictionSeries preds;
  preds.start = data.end().plus_minutes(data.time_int);
  preds.time_int = data.time_int;

  const auto n = static_cast<std::int64_t>(series.size());
  const int period = daily_period_steps(data);
  if (req.model == "auto" || req.model.empty()) {
    if (period > 0 && n >= period) {
      preds.values = seasonal_naive_forecast(data, steps);
      preds.model_name = "seasonal-naive";
    } else if (n >= 2) {
      preds.values = ar_least_squares_forecast(data, steps);
      preds.model_name = "ar-ls(" + std::to_string(ar_order(n)) + ")";
    } else {
      preds.values = persistence_forecast(data, steps);
      preds.model_name = "persistence";
    }
  } else {
    const Forecaster* fn = ForecasterRegistry::instance().find(req.model);
    if (!fn) throw Error(ErrKind::Config, "unknown forecaster '" + req.model + "'");
    preds.values = (*fn)(data, steps);
    preds.model_name = req.model;
  }
  preds.clamped_mask.assign(preds.values.size(), false);
  return preds;
}

ConstraintResult impose_constraints(const std::optional<Frame>& data,
                                    const std::optional<PredictionSeries>& preds,
                                    const std::string& constraint,
                                    std::optional<double> constraint_val) {
  const bool none = constraint.empty() || constraint == "none";
  const bool is_max = constraint == "max", is_min = constraint == "min";
  const bool calendar = constraint == "weekdays" || constraint == "weekends";
  if (!none && !is_max && !is_min && !calendar)
    throw Error(ErrKind::InvalidConstraint, "unknown constraint '" + constraint + "'");

  ConstraintResult result;
  if (preds) {
    if (calendar)
      throw Error(ErrKind::InvalidConstraint,
                  "constraint '" + constraint + "' does not apply to predictions");
    PredictionSeries out = *preds;
    if (out.clamped_mask.size() != out.values.size())
      out.clamped_mask.assign(out.values.size(), false);
    if (is_max || is_min) {
      if (!constraint_val)
        throw Error(ErrKind::InvalidConstraint, "constraint_val required for max/min");
      for (std::size_t i = 0; i < out.values.size(); ++i) {
        double clamped = is_max ? std::min(out.values[i], *constraint_val)
                                : std::max(out.values[i], *constraint_val);
        if (clamped != out.values[i]) {
          out.values[i] = clamped;
          out.clamped_mask[i] = true;  // sticky across repeated application
        }
      }
    }
    result.preds = std::move(out);
    return result;
  }

  if (data) {
    if (is_max || is_min)
      throw Error(ErrKind::InvalidConstraint,
                  "constraint '" + constraint + "' requires predictions");
    Frame out;
    out.feature = data->feature;
    out.region = data->region;
    out.sensor_ids = data->sensor_ids;
    out.time_int = data->time_int;
    auto rows = constraint_row_filter(*data, none ? "" : constraint);
    out.times.reserve(rows.size());
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(data->cols()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.times.push_back(data->times[rows[i]]);
      out.values.row(static_cast<Eigen::Index>(i)) = data->values.row(rows[i]);
    }
    result.frame = std::move(out);
    return result;
  }

  throw Error(ErrKind::InvalidConstraint, "impose_constraints needs data or preds");
}

namespace {

// Per time-of-day-slot median baseline and MAD-scaled z for one column.
struct ZScores {
  std::vector<double> expected;
  std::vector<double> z;
};

ZScores slot_z_scores(const Frame& frame, int col) {
  const auto rows = static_cast<int>(frame.rows());
  std::map<int, std::vector<double>> slots;
  for (int r = 0; r < rows; ++r) {
    double v = frame.values(r, col);
    if (!std::isnan(v)) slots[frame.times[r].minute_of_day()].push_back(v);
  }
  std::map<int, double> slot_median;
  for (auto& [slot, vals] : slots) slot_median[slot] = median_of(vals);

  std::vector<double> residuals;
  residuals.reserve(rows);
  for (int r = 0; r < rows; ++r) {
    double v = frame.values(r, col);
    if (std::isnan(v)) continue;
    residuals.push_back(v - slot_median[frame.times[r].minute_of_day()]);
  }
  double centre = median_of(residuals);
  std::vector<double> devs;
  devs.reserve(residuals.size());
  for (double r : residuals) devs.push_back(std::abs(r - centre));
  double scale = 1.4826 * median_of(devs);

  ZScores out;
  out.expected.assign(rows, std::numeric_limits<double>::quiet_NaN());
  out.z.assign(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    double v = frame.values(r, col);
    if (std::isnan(v)) continue;
    double exp = slot_median[frame.times[r].minute_of_day()];
    double resid = v - exp;
    out.expected[r] = exp;
    if (scale > 0)
      out.z[r] = resid / scale;
    else
      out.z[r] = resid == 0.0 ? 0.0 : std::copysign(HUGE_VAL, resid);
  }
  return out;
}

std::string decile_note(const TemporalAux& aux, Timestamp t) {
  // Index of the aux record aligned to t.
  std::size_t idx = aux.rows();
  for (std::size_t i = 0; i < aux.rows(); ++i)
    if (aux.times[i] == t) {
      idx = i;
      break;
    }
  if (idx == aux.rows()) return "";

  std::string note;
  for (const auto& [field, value] : aux.records[idx]) {
    const double* num = std::get_if<double>(&value);
    if (!num) continue;
    std::vector<double> all;
    for (const auto& rec : aux.records) {
      auto it = rec.find(field);
      if (it == rec.end()) continue;
      if (const double* v = std::get_if<double>(&it->second)) all.push_back(*v);
    }
    if (all.size() < 10) continue;
    double lo = quantile_of(all, 0.10), hi = quantile_of(all, 0.90);
    const char* side = nullptr;
    if (*num <= lo) side = "bottom decile";
    else if (*num >= hi) side = "top decile";
    if (side) {
      if (!note.empty()) note += "; ";
      note += "concurrent " + aux.variable + " " + field + "=" + format_number(*num) + " (" +
              side + ")";
    }
  }
  return note;
}

}  // namespace

AnomalyReport detect_anomaly(const Frame& data, const Frame* spatial_aux,
                             const TemporalAux* temp_aux, const AnomalyOptions& opts) {
  // A window of k whole days spans (k*1440 - time_int) minutes end to end.
  if (data.rows() < 2 ||
      data.times.front().minutes_until(data.times.back()) + data.time_int < 2 * 1440)
    throw Error(ErrKind::InsufficientData, "anomaly detection needs at least two days of data");

  ZScores target = slot_z_scores(data, 0);

  std::vector<ZScores> neighbour_scores;
  std::map<std::int64_t, int> aux_row_by_time;
  if (opts.spatial_reasoning && spatial_aux && spatial_aux->cols() > 0) {
    for (int c = 0; c < static_cast<int>(spatial_aux->cols()); ++c)
      neighbour_scores.push_back(slot_z_scores(*spatial_aux, c));
    for (int r = 0; r < static_cast<int>(spatial_aux->rows()); ++r)
      aux_row_by_time[spatial_aux->times[r].epoch_seconds] = r;
  }

  AnomalyReport report;
  report.method = "slot-median MAD z-score";
  for (int r = 0; r < static_cast<int>(data.rows()); ++r) {
    if (std::isnan(data.values(r, 0))) continue;
    if (std::abs(target.z[r]) <= opts.z_threshold) continue;

    AnomalyRecord rec;
    rec.time = data.times[r];
    rec.observed = data.values(r, 0);
    rec.expected = target.expected[r];
    rec.z = target.z[r];
    rec.classification = "local";
    if (!neighbour_scores.empty()) {
      auto it = aux_row_by_time.find(rec.time.epoch_seconds);
      if (it != aux_row_by_time.end()) {
        int disturbed = 0;
        for (const auto& ns : neighbour_scores)
          if (std::abs(ns.z[it->second]) > opts.neighbour_z_threshold) ++disturbed;
        if (disturbed >= opts.regional_fraction * static_cast<double>(neighbour_scores.size()))
          rec.classification = "regional";
      }
    }
    if (opts.temporal_reasoning && temp_aux) rec.note = decile_note(*temp_aux, rec.time);
    report.anomalies.push_back(std::move(rec));
  }

  // One anomaly per line, classification ahead of the numeric fields, so
  // component extraction stays unambiguous.
  std::ostringstream os;
  os << "Anomalies flagged: " << report.anomalies.size() << ". Detection threshold z: "
     << format_number(opts.z_threshold) << ". Method: " << report.method << ".";
  int idx = 1;
  for (const auto& a : report.anomalies) {
    os << "\nAnomaly " << idx++ << ": " << format_timestamp(a.time) << ", classification "
       << a.classification << ", observed " << format_number(a.observed) << ", expected "
       << format_number(a.expected) << ", z " << format_number(a.z) << ".";
    if (!a.note.empty()) os << " Note: " << a.note << ".";
  }
  report.summary = os.str();
  return report;
}

SensitivityReport sensitivity_analysis(const Frame& data, const PredictionSeries& preds,
                                       const ForecastRequest& req,
                                       const SensitivityOptions& opts) {
  if (data.rows() == 0) throw Error(ErrKind::InsufficientData, "empty history");
  (void)preds;  // the baseline is recomputed so clamped inputs cannot skew elasticities

  PredictionSeries baseline = forecast(data, req);
  const double base_mean = mean_of(baseline.values);

  auto elasticity_for = [&](const Frame& perturbed) {
    if (base_mean == 0.0) return 0.0;
    PredictionSeries re = forecast(perturbed, req);
    double m = mean_of(re.values);
    return ((m - base_mean) / base_mean) / opts.perturbation;
  };

  SensitivityReport report;
  report.perturbation_percent = opts.perturbation * 100.0;
  const auto n = static_cast<std::int64_t>(data.rows());

  std::vector<std::int64_t> lags;
  for (std::int64_t k = 1; k <= std::min<std::int64_t>(opts.temporal_lags, n); ++k)
    lags.push_back(k);
  const std::int64_t period = data.time_int > 0 ? 1440 / data.time_int : 0;
  if (period > opts.temporal_lags && n >= period) lags.push_back(period);

  for (std::int64_t k : lags) {
    double input = data.values(n - k, 0);
    double el = 0.0;
    if (!std::isnan(input) && input != 0.0) {
      Frame perturbed = data;
      perturbed.values(n - k, 0) = input * (1.0 + opts.perturbation);
      el = elasticity_for(perturbed);
    }
    report.temporal.push_back({static_cast<int>(k * data.time_int), el});
  }

  for (std::size_t c = 1; c < data.cols(); ++c) {
    Frame perturbed = data;
    perturbed.values.col(static_cast<Eigen::Index>(c)) *= (1.0 + opts.perturbation);
    report.spatial.push_back({data.sensor_ids[c], elasticity_for(perturbed)});
  }

  std::ostringstream os;
  os << "Sensitivity of the " << baseline.model_name << " forecast to +"
     << format_number(opts.perturbation * 100.0) << " percent input perturbations.";
  for (const auto& t : report.temporal)
    os << "\nElasticity at lag " << t.lag_minutes << " minutes: " << format_number(t.elasticity)
       << ".";
  for (const auto& s : report.spatial)
    os << "\nElasticity for neighbour " << s.sensor_id << ": " << format_number(s.elasticity)
       << ".";

  double best = 0.0;
  std::string best_name;
  for (const auto& t : report.temporal)
    if (std::abs(t.elasticity) >= std::abs(best)) {
      best = t.elasticity;
      best_name = "lag " + std::to_string(t.lag_minutes) + " minutes";
    }
  for (const auto& s : report.spatial)
    if (std::abs(s.elasticity) > std::abs(best)) {
      best = s.elasticity;
      best_name = "neighbour " + s.sensor_id;
    }
  if (!best_name.empty())
    os << "\nMost influential input: " << best_name << ".";
  report.summary = os.str();
  return report;
}

}  // namespace streason
