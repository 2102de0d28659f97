#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "streason/analysis.hpp"
#include "streason/datahub.hpp"
#include "streason/errors.hpp"

using namespace streason;
using streason::testing::make_frame;
using streason::testing::shared_dataset;

namespace {

// Closed-form OLS oracle with its own t CDF via adaptive Simpson quadrature.
struct OlsOracle {
  double slope = 0, p_value = 1;

  static double t_pdf(double x, double dof) {
    double c = std::exp(std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2)) /
               std::sqrt(dof * M_PI);
    return c * std::pow(1 + x * x / dof, -(dof + 1) / 2);
  }

  static double simpson(double a, double b, double dof, int n = 4000) {
    double h = (b - a) / n, sum = t_pdf(a, dof) + t_pdf(b, dof);
    for (int i = 1; i < n; ++i) sum += t_pdf(a + i * h, dof) * (i % 2 ? 4 : 2);
    return sum * h / 3;
  }

  static OlsOracle fit(const std::vector<double>& t_hours, const std::vector<double>& y) {
    OlsOracle o;
    const double n = double(y.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      st += t_hours[i];
      sy += y[i];
      stt += t_hours[i] * t_hours[i];
      sty += t_hours[i] * y[i];
    }
    double sxx = stt - st * st / n;
    o.slope = (sty - st * sy / n) / sxx;
    double intercept = sy / n - o.slope * st / n;
    double ssr = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double r = y[i] - intercept - o.slope * t_hours[i];
      ssr += r * r;
    }
    double dof = n - 2;
    if (ssr <= 0) {
      o.p_value = o.slope == 0 ? 1.0 : 0.0;
      return o;
    }
    double se = std::sqrt(ssr / dof / sxx);
    double tstat = std::abs(o.slope / se);
    // Two-sided tail by quadrature over the density.
    double tail = simpson(tstat, tstat + 400.0, dof);
    o.p_value = std::min(1.0, 2.0 * tail);
    return o;
  }
};

std::vector<double> sinusoid(int n, int period, double amplitude, double noise, Rng* rng) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double v = 50 + amplitude * std::sin(2 * M_PI * (i % period) / period);
    if (rng) v += noise * rng->normal();
    out.push_back(v);
  }
  return out;
}

// Independent variance-ratio oracle for the seasonality strength.
double strength_oracle(const std::vector<double>& values, int slots) {
  std::vector<double> sums(slots, 0);
  std::vector<int> counts(slots, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sums[i % slots] += values[i];
    counts[i % slots] += 1;
  }
  double mean = 0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double vt = 0, vr = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double slot_mean = sums[i % slots] / counts[i % slots];
    vt += (values[i] - mean) * (values[i] - mean);
    vr += (values[i] - slot_mean) * (values[i] - slot_mean);
  }
  return std::max(0.0, 1.0 - vr / vt);
}

}  // namespace

TEST_CASE("trend: exact line v = 5t recovers slope 5 with p 0") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(5.0 * i);  // hourly grid: t in hours
  auto report = analyze_trend(make_frame(values, "2017-01-02 00:00:00", 60));
  CHECK(report.slope == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(report.direction == "increasing");
  CHECK(report.p_value == 0.0);
  CHECK(report.n_points == 100);
}

TEST_CASE("trend: constant series is stable with slope 0") {
  auto report = analyze_trend(make_frame(std::vector<double>(40, 7.5), "2017-01-02 00:00:00", 60));
  CHECK(report.slope == 0.0);
  CHECK(report.direction == "stable");
  CHECK(report.p_value == 1.0);
}

TEST_CASE("trend: slope and p-value match the closed-form oracle on seed-42 data") {
  auto ds = Dataset::open(shared_dataset());
  LoadRequest req;
  req.location = "402117";
  req.time = *parse_timestamp("2017-03-04 01:40:00");
  req.time_int = 5;
  req.period = 90;
  req.unit = "days";
  req.task = "analysis";
  Frame frame = load_st_data(*ds, req);
  auto report = analyze_trend(frame, "weekdays");

  auto rows = constraint_row_filter(frame, "weekdays");
  std::vector<double> t_hours, y;
  double t0 = double(frame.times.front().epoch_seconds);
  for (int r : rows) {
    t_hours.push_back((frame.times[r].epoch_seconds - t0) / 3600.0);
    y.push_back(frame.values(r, 0));
  }
  auto oracle = OlsOracle::fit(t_hours, y);
  CHECK(report.slope == doctest::Approx(oracle.slope).epsilon(1e-9));
  CHECK(report.p_value == doctest::Approx(oracle.p_value).epsilon(1e-6));
  CHECK(report.n_points == std::int64_t(y.size()));
}

TEST_CASE("trend: positive scaling keeps direction and p-value") {
  Rng rng(3);
  std::vector<double> values;
  for (int i = 0; i < 120; ++i) values.push_back(40 + 0.8 * i + rng.normal());
  Frame f = make_frame(values, "2017-01-02 00:00:00", 60);
  auto base = analyze_trend(f);
  f.values *= 3.75;
  auto scaled = analyze_trend(f);
  CHECK(scaled.direction == base.direction);
  CHECK(scaled.p_value == doctest::Approx(base.p_value).epsilon(1e-9));
  CHECK(scaled.slope == doctest::Approx(base.slope * 3.75).epsilon(1e-9));
}

TEST_CASE("trend: fewer than three points is InsufficientData") {
  CHECK_THROWS_AS(analyze_trend(make_frame({1.0, 2.0}, "2017-01-02 00:00:00", 60)), Error);
}

TEST_CASE("seasonality: pure daily sinusoid scores 1.0") {
  auto values = sinusoid(7 * 288, 288, 20, 0, nullptr);
  auto report = analyze_seasonality(make_frame(values, "2017-01-02 00:00:00", 5));
  CHECK(report.daily_strength == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(report.dominant_period_minutes.has_value());
  CHECK(*report.dominant_period_minutes == 1440);
}

TEST_CASE("seasonality: white noise stays under the 0.1 bound (100 seeds)") {
  // Hourly grid: 24 slots over n = 2016 points.
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<double> values;
    for (int i = 0; i < 2016; ++i) values.push_back(rng.normal());
    auto report = analyze_seasonality(make_frame(values, "2017-01-02 00:00:00", 60));
    CHECK(report.daily_strength <= 0.1);
  }
}

TEST_CASE("seasonality: noisy sinusoid equals the variance-ratio oracle") {
  Rng rng(21);
  auto values = sinusoid(14 * 24, 24, 20, 4, &rng);  // hourly, 20% noise
  auto report = analyze_seasonality(make_frame(values, "2017-01-02 00:00:00", 60));
  CHECK(report.daily_strength == doctest::Approx(strength_oracle(values, 24)).epsilon(1e-9));
  CHECK(report.weekly_strength ==
        doctest::Approx(strength_oracle(values, 24 * 7)).epsilon(1e-9));
}

TEST_CASE("seasonality: shuffling rows erases the daily structure") {
  Rng rng(5);
  auto values = sinusoid(14 * 24, 24, 20, 2, &rng);
  auto base = analyze_seasonality(make_frame(values, "2017-01-02 00:00:00", 60));
  REQUIRE(base.daily_strength > 0.85);

  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto shuffled = values;
    rng.shuffle(shuffled);
    auto report = analyze_seasonality(make_frame(shuffled, "2017-01-02 00:00:00", 60));
    worst = std::max(worst, report.daily_strength);
  }
  CHECK(worst < 0.3);
}

TEST_CASE("seasonality: short windows score 0 with a note, no dominant period") {
  auto values = sinusoid(30, 24, 20, 0, nullptr);  // just over one day, hourly
  auto report = analyze_seasonality(make_frame(values, "2017-01-02 00:00:00", 60));
  CHECK(report.daily_strength == 0.0);
  CHECK(report.weekly_strength == 0.0);
  CHECK_FALSE(report.dominant_period_minutes.has_value());
  CHECK(report.summary.find("too short") != std::string::npos);
}

TEST_CASE("pearson: identical, negated, symmetric") {
  Rng rng(9);
  Eigen::VectorXd a(200), b(200);
  for (int i = 0; i < 200; ++i) {
    a[i] = rng.normal();
    b[i] = 0.6 * a[i] + 0.8 * rng.normal();
  }
  CHECK(pearson(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::VectorXd neg = -(a.array() - a.mean()).matrix();
  CHECK(pearson(a, neg) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson(a, b) == doctest::Approx(pearson(b, a)).epsilon(1e-12));
}

TEST_CASE("pearson: missing values drop pairwise") {
  Eigen::VectorXd a(5), b(5);
  a << 1, 2, std::nan(""), 4, 5;
  b << 2, 4, 100, 8, 10;
  CHECK(pearson(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("neighbourhood: correlations match a direct sum-based oracle") {
  auto ds = Dataset::open(shared_dataset());
  auto report = analyze_neighbourhood(*ds, "402117", "traffic speed");
  REQUIRE(report.neighbours.size() == 4);
  for (std::size_t i = 1; i < report.neighbours.size(); ++i)
    CHECK(report.neighbours[i - 1].distance_km <= report.neighbours[i].distance_km);

  const std::int64_t day_rows = 288;
  const std::int64_t first = std::int64_t(ds->n_steps()) - day_rows;
  int target_col = ds->sensor_column("402117");
  for (const auto& n : report.neighbours) {
    int col = ds->sensor_column(n.sensor_id);
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::int64_t r = first; r < std::int64_t(ds->n_steps()); ++r) {
      double x = ds->values()(r, target_col), y = ds->values()(r, col);
      sa += x;
      sb += y;
      sab += x * y;
      saa += x * x;
      sbb += y * y;
    }
    double nn = double(day_rows);
    double corr = (sab - sa * sb / nn) /
                  std::sqrt((saa - sa * sa / nn) * (sbb - sb * sb / nn));
    CHECK(n.correlation == doctest::Approx(corr).epsilon(1e-9));
  }
}

TEST_CASE("summaries are deterministic functions of the report") {
  auto values = sinusoid(14 * 24, 24, 20, 2, nullptr);
  Frame f = make_frame(values, "2017-01-02 00:00:00", 60);
  CHECK(analyze_trend(f).summary == analyze_trend(f).summary);
  CHECK(analyze_seasonality(f).summary == analyze_seasonality(f).summary);
}
