#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "streason/datahub.hpp"

namespace streason {

struct TrendReport {
  double slope = 0.0;    // units per hour
  double p_value = 1.0;  // two-sided significance of the slope
  std::string direction; // increasing | decreasing | stable
  std::int64_t n_points = 0;
  std::string summary;
};

struct SeasonalityReport {
  double daily_strength = 0.0;   // [0, 1]
  double weekly_strength = 0.0;  // [0, 1]
  std::optional<int> dominant_period_minutes;
  std::string summary;
};

struct NeighbourEntry {
  std::string sensor_id;
  double distance_km = 0.0;
  double correlation = 0.0;
};

struct NeighbourhoodReport {
  std::vector<NeighbourEntry> neighbours;  // ascending by distance
  std::string summary;
};

// Row filter shared by the analysis modules: "weekdays", "weekends" or empty.
// Unknown names raise InvalidConstraint.
std::vector<int> constraint_row_filter(const Frame& frame, const std::string& constraint);

// OLS of column 0 against elapsed hours; p-value from the two-sided t-test of
// the slope. Direction is "stable" iff p >= 0.05.
TrendReport analyze_trend(const Frame& data, const std::string& constraint = "");

// Variance-ratio strength of the daily (1440/time_int slots) and weekly (7x)
// per-slot mean profiles. Periods not covered twice score 0 with a note.
SeasonalityReport analyze_seasonality(const Frame& data, const std::string& constraint = "");

// Pearson correlation between the target sensor and each neighbour over the
// trailing 24 h of the dataset at its native interval.
NeighbourhoodReport analyze_neighbourhood(const Dataset& ds, const std::string& location,
                                          const std::string& feature, int k = 4);

// Pairwise-complete Pearson correlation; NaN entries in either input drop the
// pair. Returns 0 when either side is constant.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation. Basis
// of the t-distribution tail used for trend significance.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double t_test_p_value(double t, double dof);

}  // namespace streason
