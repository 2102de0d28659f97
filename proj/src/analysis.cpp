#include "streason/analysis.hpp"

#include <cmath>
#include <sstream>

#include "streason/errors.hpp"
#include "streason/util.hpp"

namespace streason {

std::vector<int> constraint_row_filter(const Frame& frame, const std::string& constraint) {
  std::vector<int> rows;
  rows.reserve(frame.rows());
  bool weekdays = false, weekends = false;
  if (constraint == "weekdays")
    weekdays = true;
  else if (constraint == "weekends")
    weekends = true;
  else if (!constraint.empty() && constraint != "none")
    throw Error(ErrKind::InvalidConstraint,
                "row filter must be 'weekdays' or 'weekends', got '" + constraint + "'");
  for (int r = 0; r < static_cast<int>(frame.rows()); ++r) {
    bool weekend = frame.times[r].is_weekend();
    if ((weekdays && weekend) || (weekends && !weekend)) continue;
    rows.push_back(r);
  }
  return rows;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Lentz's continued fraction for the regularized incomplete beta.
  auto betacf = [](double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 1e-15, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
      int m2 = 2 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  };
  double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double front = std::exp(ln_beta + a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(ln_beta + b * std::log(1.0 - x) + a * std::log(x)) * betacf(b, a, 1.0 - x) / b;
}

double t_test_p_value(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  if (dof <= 0) return 1.0;
  double x = dof / (dof + t * t);
  return incomplete_beta(dof / 2.0, 0.5, x);
}

TrendReport analyze_trend(const Frame& data, const std::string& constraint) {
  auto rows = constraint_row_filter(data, constraint);
  std::vector<double> t_hours, y;
  if (!data.times.empty()) {
    const double t0 = static_cast<double>(data.times.front().epoch_seconds);
    for (int r : rows) {
      double v = data.values(r, 0);
      if (std::isnan(v)) continue;
      t_hours.push_back((data.times[r].epoch_seconds - t0) / 3600.0);
      y.push_back(v);
    }
  }
  const auto n = static_cast<std::int64_t>(y.size());
  if (n < 3)
    throw Error(ErrKind::InsufficientData,
                "trend needs at least 3 points, got " + std::to_string(n));

  Eigen::Map<const Eigen::VectorXd> tv(t_hours.data(), n), yv(y.data(), n);
  const double t_mean = tv.mean(), y_mean = yv.mean();
  Eigen::ArrayXd td = tv.array() - t_mean, yd = yv.array() - y_mean;
  const double sxx = (td * td).sum();
  if (sxx <= 0.0)
    throw Error(ErrKind::InsufficientData, "trend needs more than one distinct timestamp");
  const double slope = (td * yd).sum() / sxx;

  Eigen::ArrayXd resid = yd - slope * td;
  const double ssr = (resid * resid).sum();
  double p_value;
  const double dof = static_cast<double>(n - 2);
  if (ssr <= 1e-24 * std::max(1.0, (yd * yd).sum())) {
    // Exact fit: the slope is either exactly zero or infinitely significant.
    p_value = slope == 0.0 ? 1.0 : 0.0;
  } else {
    const double se = std::sqrt(ssr / dof / sxx);
    p_value = t_test_p_value(slope / se, dof);
  }

  TrendReport report;
  report.slope = slope;
  report.p_value = p_value;
  report.n_points = n;
  report.direction = p_value >= 0.05 ? "stable" : (slope > 0 ? "increasing" : "decreasing");

  std::ostringstream os;
  os << "Trend slope: " << format_number(slope) << " per hour. Trend p-value: "
     << format_number(p_value) << ". Trend direction: " << report.direction
     << ". Points analysed: " << n << ".";
  report.summary = os.str();
  return report;
}

namespace {

// Strength of a fixed-period per-slot mean profile:
//   max(0, 1 - Var(remainder) / Var(series - mean))
// Returns nullopt when the window does not cover the period twice.
std::optional<double> profile_strength(const std::vector<Timestamp>& times,
                                       const std::vector<double>& values, int time_int,
                                       int period_minutes) {
  if (times.size() < 2) return std::nullopt;
  // k whole periods of data span (k*period - time_int) minutes end to end.
  std::int64_t span_min = times.front().minutes_until(times.back()) + time_int;
  if (span_min < 2LL * period_minutes) return std::nullopt;

  // Slot = position inside the period, at the finest spacing present.
  std::map<std::int64_t, std::pair<double, int>> slot_sums;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::int64_t slot = ((times[i].epoch_seconds / 60) % period_minutes);
    auto& [sum, count] = slot_sums[slot];
    sum += values[i];
    ++count;
  }
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());

  double var_total = 0, var_rem = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::int64_t slot = ((times[i].epoch_seconds / 60) % period_minutes);
    auto& [sum, count] = slot_sums[slot];
    double slot_mean = sum / count;
    var_total += (values[i] - mean) * (values[i] - mean);
    var_rem += (values[i] - slot_mean) * (values[i] - slot_mean);
  }
  if (var_total <= 0.0) return 0.0;  // constant series carries no seasonality
  return std::max(0.0, 1.0 - var_rem / var_total);
}

}  // namespace

SeasonalityReport analyze_seasonality(const Frame& data, const std::string& constraint) {
  auto rows = constraint_row_filter(data, constraint);
  std::vector<Timestamp> times;
  std::vector<double> values;
  for (int r : rows) {
    double v = data.values(r, 0);
    if (std::isnan(v)) continue;
    times.push_back(data.times[r]);
    values.push_back(v);
  }
  if (values.size() < 4)
    throw Error(ErrKind::InsufficientData,
                "seasonality needs at least 4 points, got " + std::to_string(values.size()));

  auto daily = profile_strength(times, values, data.time_int, 1440);
  auto weekly = profile_strength(times, values, data.time_int, 7 * 1440);

  SeasonalityReport report;
  report.daily_strength = daily.value_or(0.0);
  report.weekly_strength = weekly.value_or(0.0);
  double best = std::max(report.daily_strength, report.weekly_strength);
  if (best > 0.3)
    report.dominant_period_minutes =
        report.daily_strength >= report.weekly_strength ? 1440 : 7 * 1440;

  std::ostringstream os;
  os << "Daily seasonality strength: " << format_number(report.daily_strength)
     << ". Weekly seasonality strength: " << format_number(report.weekly_strength) << ".";
  if (!daily) os << " Window too short to assess the daily period.";
  if (!weekly) os << " Window too short to assess the weekly period.";
  if (report.dominant_period_minutes)
    os << " Dominant period minutes: " << *report.dominant_period_minutes << ".";
  else
    os << " No dominant period.";
  report.summary = os.str();
  return report;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = std::min(a.size(), b.size());
  double sa = 0, sb = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    sa += a[i];
    sb += b[i];
    ++count;
  }
  if (count < 2) return 0.0;
  double ma = sa / count, mb = sb / count;
  double num = 0, da = 0, db = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da <= 0.0 || db <= 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

NeighbourhoodReport analyze_neighbourhood(const Dataset& ds, const std::string& location,
                                          const std::string& feature, int k) {
  int target_col = ds.sensor_column(location);
  if (target_col < 0) throw Error(ErrKind::UnknownSensor, "sensor " + location + " not in dataset");

  // Correlations over the trailing 24 h at native resolution.
  const std::int64_t rows_per_day = 1440 / ds.native_interval();
  const std::int64_t total = static_cast<std::int64_t>(ds.n_steps());
  const std::int64_t first = std::max<std::int64_t>(0, total - rows_per_day);
  const std::int64_t count = total - first;
  Eigen::VectorXd target = ds.values().col(target_col).segment(first, count);

  NeighbourhoodReport report;
  for (const auto& [nid, dist] : ds.nearest_neighbours(location, k)) {
    Eigen::VectorXd nv = ds.values().col(ds.sensor_column(nid)).segment(first, count);
    report.neighbours.push_back({nid, dist, pearson(target, nv)});
  }
  std::sort(report.neighbours.begin(), report.neighbours.end(), [](const auto& a, const auto& b) {
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return a.sensor_id < b.sensor_id;
  });

  std::ostringstream os;
  os << "Neighbours analysed: " << report.neighbours.size() << ".";
  int idx = 1;
  for (const auto& n : report.neighbours) {
    os << "\nNeighbour " << idx++ << ": sensor " << n.sensor_id << ", distance "
       << format_number(n.distance_km) << " km, correlation " << format_number(n.correlation)
       << ".";
  }
  (void)feature;
  report.summary = os.str();
  return report;
}

}  // namespace streason
