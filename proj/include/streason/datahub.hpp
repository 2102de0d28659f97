#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "streason/timestamp.hpp"

namespace streason {

// Sensor x time value grid. Loader-produced frames sit on a regular grid
// (times[i+1] - times[i] == time_int minutes); calendar-filtered frames keep
// per-row timestamps but lose equal spacing. Missing values are NaN.
struct Frame {
  std::string feature;
  std::string region;
  std::vector<std::string> sensor_ids;  // column j <-> sensor_ids[j]
  std::vector<Timestamp> times;         // row i <-> times[i], strictly increasing
  int time_int = 0;                     // minutes between grid points
  Eigen::MatrixXd values;               // times.size() x sensor_ids.size()

  std::size_t rows() const { return times.size(); }
  std::size_t cols() const { return sensor_ids.size(); }
  Timestamp start() const { return times.empty() ? Timestamp{} : times.front(); }
  Timestamp end() const { return times.empty() ? Timestamp{} : times.back(); }
  Eigen::VectorXd target() const { return values.col(0); }

  std::string brief() const;  // e.g. "Frame[12x5] traffic speed 02:05..03:00"
};

struct SensorMeta {
  std::string sensor_id;
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]
  std::optional<std::vector<std::string>> neighbours;  // explicit adjacency override
};

using AuxField = std::variant<double, std::string>;
using AuxRecord = std::map<std::string, AuxField>;

// Temporal auxiliary series (weather and the like) aligned to a frame grid by
// forward-fill from its coarser native resolution.
struct TemporalAux {
  std::string variable;
  std::vector<Timestamp> times;
  int time_int = 0;
  std::vector<AuxRecord> records;  // one per grid timestamp

  std::size_t rows() const { return times.size(); }
};

struct AnomalyTruth {
  std::string sensor_id;
  Timestamp time;
  double magnitude_sigma = 0.0;
};

// In-memory image of a dataset directory. Opened read-only and shared between
// concurrent executions.
class Dataset {
public:
  static std::shared_ptr<const Dataset> open(const std::string& root);

  const std::string& root() const { return root_; }
  const std::string& feature() const { return feature_; }
  const std::string& region() const { return region_; }
  Timestamp start() const { return start_; }
  int native_interval() const { return time_int_; }
  std::size_t n_steps() const { return static_cast<std::size_t>(values_.rows()); }
  Timestamp last_time() const { return start_.plus_minutes((values_.rows() - 1) * time_int_); }

  const std::vector<SensorMeta>& sensors() const { return meta_; }
  const SensorMeta* find_sensor(const std::string& id) const;
  int sensor_column(const std::string& id) const;  // -1 if unknown

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::pair<Timestamp, std::pair<std::string, AuxRecord>>>& aux_records() const {
    return aux_;
  }
  const std::vector<AnomalyTruth>& anomaly_truth() const { return truth_; }

  // k nearest sensors to `id` by haversine distance (explicit `neighbours`
  // lists take precedence). Ties break on sensor id.
  std::vector<std::pair<std::string, double>> nearest_neighbours(const std::string& id,
                                                                 int k) const;

private:
  std::string root_;
  std::string feature_ = "value";
  std::string region_ = "";
  Timestamp start_{};
  int time_int_ = 5;
  Eigen::MatrixXd values_;
  std::vector<SensorMeta> meta_;
  std::map<std::string, int> columns_;
  std::vector<std::pair<Timestamp, std::pair<std::string, AuxRecord>>> aux_;  // sorted by time
  std::vector<AnomalyTruth> truth_;
};

double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct LoadRequest {
  std::string location;
  Timestamp time;        // window END (history runs up to "now")
  std::string feature;
  std::string region;
  int time_int = 5;      // minutes
  std::int64_t period = 1;
  std::string unit;      // minutes | hours | days
  std::string task;      // analysis | anomaly detection | prediction
};

std::int64_t period_to_minutes(std::int64_t period, const std::string& unit);

// Window of `period x unit` ending at `time`; target sensor in column 0, and
// for anomaly/prediction tasks its neighbours in further columns.
Frame load_st_data(const Dataset& ds, const LoadRequest& req);

struct SpatialAux {
  Frame frame;  // neighbour columns only
  std::vector<SensorMeta> neighbours;
};

SpatialAux load_spatial_aux(const Dataset& ds, const LoadRequest& req, int k = 4);

TemporalAux load_temporal_aux(const Dataset& ds, const std::string& temp_var,
                              const LoadRequest& req);

struct SynthAnomalySpec {
  std::string sensor_id;
  std::string time;  // YYYY-MM-DD HH:MM:SS
  double magnitude_sigma = 8.0;
};

struct SynthConfig {
  std::string region = "BAY";
  std::string feature = "traffic speed";
  std::string start = "2016-12-01 00:00:00";
  int days = 100;
  int time_int = 5;  // minutes
  int grid_rows = 4;
  int grid_cols = 4;
  std::vector<std::string> sensor_ids;  // optional; must match grid size when set
  double base_level = 60.0;
  double daily_amplitude = 22.0;
  double weekly_amplitude = 3.0;
  double weekend_shift = -6.0;  // level change on Saturday/Sunday
  double noise_sigma = 3.0;
  std::vector<SynthAnomalySpec> anomalies;
  std::string aux_variable = "weather";
  int aux_interval_minutes = 60;
};

SynthConfig default_synth_config();  // the seed-42 benchmark dataset layout
SynthConfig load_synth_config(const std::string& path);

// Writes values.csv, sensors.json, temporal_aux.csv, anomalies.csv and
// manifest.json under `out_dir`. Byte-identical for identical (seed, config).
void synth_dataset(std::uint64_t seed, const SynthConfig& config, const std::string& out_dir);

}  // namespace streason
