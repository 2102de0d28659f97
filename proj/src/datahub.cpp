#include "streason/datahub.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "streason/errors.hpp"
#include "streason/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace streason {

std::string Frame::brief() const {
  std::ostringstream os;
  os << "Frame[" << rows() << "x" << cols() << "]";
  if (!feature.empty()) os << " " << feature;
  if (!times.empty())
    os << " " << format_timestamp(times.front()) << " .. " << format_timestamp(times.back());
  return os.str();
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0088;
  auto rad = [](double deg) { return deg * M_PI / 180.0; };
  double dlat = rad(lat2 - lat1), dlon = rad(lon2 - lon1);
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(rad(lat1)) * std::cos(rad(lat2)) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::int64_t period_to_minutes(std::int64_t period, const std::string& unit) {
  if (unit == "minutes") return period;
  if (unit == "hours") return period * 60;
  if (unit == "days") return period * 1440;
  throw Error(ErrKind::Config, "unit must be one of minutes/hours/days, got '" + unit + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line, std::size_t max_fields) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (out.size() + 1 < max_fields) {
    auto comma = line.find(',', pos);
    if (comma == std::string::npos) break;
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  out.push_back(line.substr(pos));
  return out;
}

Timestamp parse_ts_or_throw(const std::string& s, const std::string& where) {
  auto ts = parse_timestamp(trim(s));
  if (!ts) throw Error(ErrKind::Format, where + ": bad timestamp '" + s + "'");
  return *ts;
}

}  // namespace

const SensorMeta* Dataset::find_sensor(const std::string& id) const {
  for (const auto& m : meta_)
    if (m.sensor_id == id) return &m;
  return nullptr;
}

int Dataset::sensor_column(const std::string& id) const {
  auto it = columns_.find(id);
  return it == columns_.end() ? -1 : it->second;
}

std::vector<std::pair<std::string, double>> Dataset::nearest_neighbours(const std::string& id,
                                                                        int k) const {
  const SensorMeta* self = find_sensor(id);
  if (!self) throw Error(ErrKind::UnknownSensor, "sensor " + id + " not in dataset");
  std::vector<std::pair<std::string, double>> out;
  if (self->neighbours) {
    for (const auto& nid : *self->neighbours) {
      const SensorMeta* nm = find_sensor(nid);
      if (!nm) throw Error(ErrKind::UnknownSensor, "declared neighbour " + nid + " not in dataset");
      out.emplace_back(nid, haversine_km(self->latitude, self->longitude, nm->latitude,
                                         nm->longitude));
    }
    return out;
  }
  for (const auto& m : meta_) {
    if (m.sensor_id == id) continue;
    out.emplace_back(m.sensor_id,
                     haversine_km(self->latitude, self->longitude, m.latitude, m.longitude));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(out.size()) > k) out.resize(k);
  return out;
}

std::shared_ptr<const Dataset> Dataset::open(const std::string& root) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const Dataset>> cache;
  std::string key = fs::absolute(root).lexically_normal().string();
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  auto ds = std::make_shared<Dataset>();
  ds->root_ = key;

  fs::path dir(root);
  if (!fs::exists(dir / "values.csv"))
    throw Error(ErrKind::Io, "no values.csv under dataset root " + root);

  // Grid geometry comes from the manifest when present; otherwise it is
  // inferred from the value file (real-dataset exports carry no manifest).
  bool have_manifest = fs::exists(dir / "manifest.json");
  std::size_t n_steps = 0;
  if (have_manifest) {
    std::ifstream in(dir / "manifest.json");
    json m;
    try {
      in >> m;
      ds->region_ = m.value("region", "");
      ds->feature_ = m.value("feature", "value");
      ds->start_ = parse_ts_or_throw(m.at("start").get<std::string>(), "manifest");
      ds->time_int_ = m.at("time_int").get<int>();
      n_steps = m.at("n_steps").get<std::size_t>();
    } catch (const json::exception& e) {
      throw Error(ErrKind::Format, std::string("manifest.json: ") + e.what());
    }
  }

  if (fs::exists(dir / "sensors.json")) {
    std::ifstream in(dir / "sensors.json");
    json doc;
    try {
      in >> doc;
      for (const auto& s : doc) {
        SensorMeta m;
        m.sensor_id = s.at("sensor_id").get<std::string>();
        m.latitude = s.at("latitude").get<double>();
        m.longitude = s.at("longitude").get<double>();
        if (std::abs(m.latitude) > 90.0 || std::abs(m.longitude) > 180.0)
          throw Error(ErrKind::Format, "sensor " + m.sensor_id + " has out-of-range coordinates");
        if (s.contains("neighbours"))
          m.neighbours = s["neighbours"].get<std::vector<std::string>>();
        ds->meta_.push_back(std::move(m));
      }
    } catch (const json::exception& e) {
      throw Error(ErrKind::Format, std::string("sensors.json: ") + e.what());
    }
  }

  std::ifstream vin(dir / "values.csv");
  std::string line;
  std::getline(vin, line);  // header
  if (!have_manifest || ds->meta_.empty()) {
    // Inference pass: collect the grid and the sensor set.
    std::set<std::int64_t> stamps;
    std::vector<std::string> ids;
    std::set<std::string> seen;
    std::ifstream scan(dir / "values.csv");
    std::string l;
    std::getline(scan, l);
    while (std::getline(scan, l)) {
      if (l.empty()) continue;
      auto f = split_csv(l, 3);
      if (f.size() != 3) throw Error(ErrKind::Format, "values.csv: bad row '" + l + "'");
      stamps.insert(parse_ts_or_throw(f[0], "values.csv").epoch_seconds);
      if (seen.insert(f[1]).second) ids.push_back(f[1]);
    }
    if (stamps.empty()) throw Error(ErrKind::Format, "values.csv holds no rows");
    if (!have_manifest) {
      ds->start_ = Timestamp{*stamps.begin()};
      std::int64_t step = 0;
      std::int64_t prev = -1;
      for (auto s : stamps) {
        if (prev >= 0) step = step == 0 ? s - prev : std::min(step, s - prev);
        prev = s;
      }
      if (step <= 0 || step % 60 != 0)
        throw Error(ErrKind::Format, "values.csv: cannot infer a minute-aligned interval");
      ds->time_int_ = static_cast<int>(step / 60);
      n_steps = static_cast<std::size_t>((*stamps.rbegin() - *stamps.begin()) / step) + 1;
    }
    if (ds->meta_.empty()) {
      std::sort(ids.begin(), ids.end());
      for (const auto& id : ids) ds->meta_.push_back({id, 0.0, 0.0, std::nullopt});
    }
  }

  for (std::size_t i = 0; i < ds->meta_.size(); ++i)
    ds->columns_[ds->meta_[i].sensor_id] = static_cast<int>(i);

  ds->values_ = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_steps),
                                          static_cast<Eigen::Index>(ds->meta_.size()),
                                          std::numeric_limits<double>::quiet_NaN());
  const std::int64_t step_sec = static_cast<std::int64_t>(ds->time_int_) * 60;
  while (std::getline(vin, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line, 3);
    if (f.size() != 3) throw Error(ErrKind::Format, "values.csv: bad row '" + line + "'");
    Timestamp t = parse_ts_or_throw(f[0], "values.csv");
    std::int64_t off = t.epoch_seconds - ds->start_.epoch_seconds;
    if (off < 0 || off % step_sec != 0) continue;  // off-grid rows are ignored
    std::int64_t r = off / step_sec;
    if (r >= static_cast<std::int64_t>(n_steps)) continue;
    auto ci = ds->columns_.find(f[1]);
    if (ci == ds->columns_.end()) continue;
    auto v = parse_number(trim(f[2]));
    ds->values_(r, ci->second) = v ? *v : std::numeric_limits<double>::quiet_NaN();
  }

  if (fs::exists(dir / "temporal_aux.csv")) {
    std::ifstream ain(dir / "temporal_aux.csv");
    std::getline(ain, line);
    std::map<std::pair<std::int64_t, std::string>, AuxRecord> grouped;
    while (std::getline(ain, line)) {
      if (line.empty()) continue;
      auto f = split_csv(line, 4);
      if (f.size() != 4) throw Error(ErrKind::Format, "temporal_aux.csv: bad row '" + line + "'");
      Timestamp t = parse_ts_or_throw(f[0], "temporal_aux.csv");
      AuxField field;
      if (auto num = parse_number(trim(f[3])))
        field = *num;
      else
        field = trim(f[3]);
      grouped[{t.epoch_seconds, f[1]}][f[2]] = field;
    }
    for (auto& [key, rec] : grouped)
      ds->aux_.push_back({Timestamp{key.first}, {key.second, std::move(rec)}});
    std::sort(ds->aux_.begin(), ds->aux_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  if (fs::exists(dir / "anomalies.csv")) {
    std::ifstream tin(dir / "anomalies.csv");
    std::getline(tin, line);
    while (std::getline(tin, line)) {
      if (line.empty()) continue;
      auto f = split_csv(line, 3);
      if (f.size() != 3) throw Error(ErrKind::Format, "anomalies.csv: bad row '" + line + "'");
      auto mag = parse_number(trim(f[2]));
      if (!mag) throw Error(ErrKind::Format, "anomalies.csv: bad magnitude '" + f[2] + "'");
      ds->truth_.push_back({f[0], parse_ts_or_throw(f[1], "anomalies.csv"), *mag});
    }
  }

  std::lock_guard<std::mutex> lock(mu);
  cache[key] = ds;
  return ds;
}

namespace {

struct WindowPlan {
  Timestamp effective_end;
  std::int64_t rows;
  std::int64_t stride;      // native steps per requested step
  std::int64_t first_native;  // native row index of the window's first row
};

WindowPlan plan_window(const Dataset& ds, const LoadRequest& req) {
  if (req.period < 1) throw Error(ErrKind::Config, "period must be >= 1");
  if (req.time_int < 1) throw Error(ErrKind::Config, "time_int must be >= 1");
  if (req.time_int % ds.native_interval() != 0)
    throw Error(ErrKind::MisalignedInterval,
                "requested interval " + std::to_string(req.time_int) +
                    " is not a multiple of the dataset interval " +
                    std::to_string(ds.native_interval()));

  std::int64_t window_minutes = period_to_minutes(req.period, req.unit);
  std::int64_t rows = window_minutes / req.time_int;
  if (rows < 1)
    throw Error(ErrKind::Config, "window shorter than one interval");

  std::int64_t offset_min = (req.time.epoch_seconds - ds.start().epoch_seconds) / 60;
  if (req.time.epoch_seconds < ds.start().epoch_seconds)
    throw Error(ErrKind::WindowOutOfRange,
                "time " + format_timestamp(req.time) + " precedes dataset start " +
                    format_timestamp(ds.start()));
  // Off-grid request times truncate down to the nearest grid point.
  std::int64_t aligned = offset_min - offset_min % req.time_int;
  Timestamp effective_end = ds.start().plus_minutes(aligned);
  if (effective_end > ds.last_time())
    throw Error(ErrKind::WindowOutOfRange,
                "time " + format_timestamp(req.time) + " beyond dataset end " +
                    format_timestamp(ds.last_time()));

  std::int64_t first_min = aligned - (rows - 1) * req.time_int;
  if (first_min < 0)
    throw Error(ErrKind::WindowOutOfRange,
                "window of " + std::to_string(window_minutes) + " minutes ending " +
                    format_timestamp(effective_end) + " starts before dataset start");

  return {effective_end, rows, req.time_int / ds.native_interval(),
          first_min / ds.native_interval()};
}

Frame extract_window(const Dataset& ds, const LoadRequest& req, const WindowPlan& plan,
                     const std::vector<std::string>& sensor_ids) {
  Frame frame;
  frame.feature = req.feature.empty() ? ds.feature() : req.feature;
  frame.region = req.region.empty() ? ds.region() : req.region;
  frame.sensor_ids = sensor_ids;
  frame.time_int = req.time_int;
  frame.times.reserve(plan.rows);
  frame.values.resize(plan.rows, static_cast<Eigen::Index>(sensor_ids.size()));
  std::vector<int> cols;
  for (const auto& id : sensor_ids) {
    int c = ds.sensor_column(id);
    if (c < 0) throw Error(ErrKind::UnknownSensor, "sensor " + id + " not in dataset");
    cols.push_back(c);
  }
  Timestamp first =
      plan.effective_end.plus_minutes(-(plan.rows - 1) * static_cast<std::int64_t>(req.time_int));
  for (std::int64_t r = 0; r < plan.rows; ++r) {
    frame.times.push_back(first.plus_minutes(r * req.time_int));
    std::int64_t native_row = plan.first_native + r * plan.stride;
    for (std::size_t j = 0; j < cols.size(); ++j)
      frame.values(r, static_cast<Eigen::Index>(j)) = ds.values()(native_row, cols[j]);
  }
  return frame;
}

bool wants_neighbours(const std::string& task) {
  auto t = lower(task);
  return t.find("anomal") != std::string::npos || t.find("predict") != std::string::npos;
}

}  // namespace

Frame load_st_data(const Dataset& ds, const LoadRequest& req) {
  if (ds.sensor_column(req.location) < 0)
    throw Error(ErrKind::UnknownSensor, "sensor " + req.location + " not in dataset");
  WindowPlan plan = plan_window(ds, req);
  std::vector<std::string> ids{req.location};
  if (wants_neighbours(req.task))
    for (const auto& [nid, dist] : ds.nearest_neighbours(req.location, 4)) ids.push_back(nid);
  return extract_window(ds, req, plan, ids);
}

SpatialAux load_spatial_aux(const Dataset& ds, const LoadRequest& req, int k) {
  if (ds.sensor_column(req.location) < 0)
    throw Error(ErrKind::UnknownSensor, "sensor " + req.location + " not in dataset");
  WindowPlan plan = plan_window(ds, req);
  SpatialAux aux;
  std::vector<std::string> ids;
  for (const auto& [nid, dist] : ds.nearest_neighbours(req.location, k)) {
    ids.push_back(nid);
    aux.neighbours.push_back(*ds.find_sensor(nid));
  }
  aux.frame = extract_window(ds, req, plan, ids);
  return aux;
}

TemporalAux load_temporal_aux(const Dataset& ds, const std::string& temp_var,
                              const LoadRequest& req) {
  WindowPlan plan = plan_window(ds, req);
  std::vector<std::pair<Timestamp, const AuxRecord*>> series;
  for (const auto& [t, var_rec] : ds.aux_records())
    if (var_rec.first == temp_var) series.emplace_back(t, &var_rec.second);
  if (series.empty())
    throw Error(ErrKind::Config, "dataset has no temporal aux variable '" + temp_var + "'");

  TemporalAux aux;
  aux.variable = temp_var;
  aux.time_int = req.time_int;
  Timestamp first =
      plan.effective_end.plus_minutes(-(plan.rows - 1) * static_cast<std::int64_t>(req.time_int));
  std::size_t cursor = 0;
  for (std::int64_t r = 0; r < plan.rows; ++r) {
    Timestamp t = first.plus_minutes(r * req.time_int);
    while (cursor + 1 < series.size() && series[cursor + 1].first <= t) ++cursor;
    if (series[cursor].first > t)
      throw Error(ErrKind::WindowOutOfRange,
                  "temporal aux '" + temp_var + "' starts after " + format_timestamp(t));
    aux.times.push_back(t);
    aux.records.push_back(*series[cursor].second);  // forward-fill
  }
  return aux;
}

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.sensor_ids = {"400001", "400017", "400030", "400045",
                    "401846", "401890", "402056", "402117",
                    "403225", "404370", "405619", "407154",
                    "408907", "409524", "410810", "411912"};
  // Three single-sensor bursts plus one simultaneous regional event, all on
  // weekday spans so slot medians stay clean.
  cfg.anomalies = {
      {"401846", "2017-01-17 08:30:00", 8.0},  {"401846", "2017-01-18 17:45:00", -8.0},
      {"401846", "2017-01-19 12:00:00", 8.0},  {"402056", "2017-02-07 07:15:00", 8.0},
      {"402056", "2017-02-08 18:30:00", 8.0},  {"404370", "2017-01-24 09:05:00", -8.0},
      {"404370", "2017-01-25 15:40:00", 8.0},  {"404370", "2017-01-26 11:20:00", 8.0},
      {"408907", "2017-02-21 08:00:00", 8.0},  {"408907", "2017-02-22 16:45:00", -8.0},
      {"400030", "2017-02-15 10:30:00", 8.0},  {"400017", "2017-02-15 10:30:00", 8.0},
      {"400001", "2017-02-15 10:30:00", 8.0},  {"400045", "2017-02-15 10:30:00", 8.0},
      {"401890", "2017-02-15 10:30:00", 8.0},
  };
  return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "cannot open synth config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrKind::Config, std::string("synth config: ") + e.what());
  }
  SynthConfig cfg = doc.value("defaults", false) ? default_synth_config() : SynthConfig{};
  try {
    cfg.region = doc.value("region", cfg.region);
    cfg.feature = doc.value("feature", cfg.feature);
    cfg.start = doc.value("start", cfg.start);
    cfg.days = doc.value("days", cfg.days);
    cfg.time_int = doc.value("time_int", cfg.time_int);
    cfg.grid_rows = doc.value("grid_rows", cfg.grid_rows);
    cfg.grid_cols = doc.value("grid_cols", cfg.grid_cols);
    if (doc.contains("sensor_ids"))
      cfg.sensor_ids = doc["sensor_ids"].get<std::vector<std::string>>();
    cfg.base_level = doc.value("base_level", cfg.base_level);
    cfg.daily_amplitude = doc.value("daily_amplitude", cfg.daily_amplitude);
    cfg.weekly_amplitude = doc.value("weekly_amplitude", cfg.weekly_amplitude);
    cfg.weekend_shift = doc.value("weekend_shift", cfg.weekend_shift);
    cfg.noise_sigma = doc.value("noise_sigma", cfg.noise_sigma);
    if (doc.contains("anomalies")) {
      cfg.anomalies.clear();
      for (const auto& a : doc["anomalies"])
        cfg.anomalies.push_back({a.at("sensor_id").get<std::string>(),
                                 a.at("time").get<std::string>(),
                                 a.value("magnitude_sigma", 8.0)});
    }
    cfg.aux_variable = doc.value("aux_variable", cfg.aux_variable);
    cfg.aux_interval_minutes = doc.value("aux_interval_minutes", cfg.aux_interval_minutes);
  } catch (const json::exception& e) {
    throw Error(ErrKind::Config, std::string("synth config: ") + e.what());
  }
  return cfg;
}

void synth_dataset(std::uint64_t seed, const SynthConfig& config, const std::string& out_dir) {
  if (config.days < 1 || config.time_int < 1 || 1440 % config.time_int != 0)
    throw Error(ErrKind::Config, "days must be >= 1 and time_int must divide 1440");
  int n_sensors = config.grid_rows * config.grid_cols;
  if (n_sensors < 1) throw Error(ErrKind::Config, "empty sensor grid");
  std::vector<std::string> ids = config.sensor_ids;
  if (ids.empty()) {
    for (int r = 0; r < config.grid_rows; ++r)
      for (int c = 0; c < config.grid_cols; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "S%02d%02d", r + 1, c + 1);
        ids.push_back(buf);
      }
  }
  if (static_cast<int>(ids.size()) != n_sensors)
    throw Error(ErrKind::Config, "sensor_ids count does not match grid size");

  auto start = parse_timestamp(config.start);
  if (!start) throw Error(ErrKind::Config, "bad start timestamp '" + config.start + "'");
  const std::int64_t steps_per_day = 1440 / config.time_int;
  const std::int64_t n_steps = steps_per_day * config.days;

  fs::create_directories(out_dir);
  fs::path dir(out_dir);

  Rng rng(seed);
  std::vector<double> phase(n_sensors), offset(n_sensors);
  for (int s = 0; s < n_sensors; ++s) {
    phase[s] = rng.uniform() * 2.0 * M_PI;
    offset[s] = rng.normal() * 2.0;
  }

  // Anomaly lookup keyed by (sensor index, step).
  std::map<std::pair<int, std::int64_t>, double> bumps;
  for (const auto& a : config.anomalies) {
    auto it = std::find(ids.begin(), ids.end(), a.sensor_id);
    if (it == ids.end())
      throw Error(ErrKind::Config, "anomaly sensor " + a.sensor_id + " not in grid");
    auto t = parse_timestamp(a.time);
    if (!t) throw Error(ErrKind::Config, "bad anomaly time '" + a.time + "'");
    std::int64_t off_min = start->minutes_until(*t);
    if (off_min < 0 || off_min % config.time_int != 0 ||
        off_min / config.time_int >= n_steps)
      throw Error(ErrKind::Config, "anomaly time " + a.time + " off the dataset grid");
    // With a noiseless config an N-sigma bump still has to be visible.
    double unit = config.noise_sigma > 0 ? config.noise_sigma : 1.0;
    bumps[{static_cast<int>(it - ids.begin()), off_min / config.time_int}] =
        a.magnitude_sigma * unit;
  }

  FILE* vf = std::fopen((dir / "values.csv").string().c_str(), "w");
  if (!vf) throw Error(ErrKind::Io, "cannot write " + (dir / "values.csv").string());
  std::fputs("timestamp,sensor_id,value\n", vf);
  for (std::int64_t step = 0; step < n_steps; ++step) {
    Timestamp t = start->plus_minutes(step * config.time_int);
    std::string ts = format_timestamp(t);
    double tod = t.minute_of_day() / 1440.0;
    double week_pos = ((t.epoch_seconds / 60) % (7 * 1440)) / (7.0 * 1440.0);
    for (int s = 0; s < n_sensors; ++s) {
      double v = config.base_level + offset[s] +
                 config.daily_amplitude * std::sin(2.0 * M_PI * tod + phase[s]) +
                 config.weekly_amplitude * std::sin(2.0 * M_PI * week_pos) +
                 (t.is_weekend() ? config.weekend_shift : 0.0) +
                 config.noise_sigma * rng.normal();
      auto bump = bumps.find({s, step});
      if (bump != bumps.end()) v += bump->second;
      std::fprintf(vf, "%s,%s,%.4f\n", ts.c_str(), ids[s].c_str(), v);
    }
  }
  std::fclose(vf);

  json sensors = json::array();
  for (int s = 0; s < n_sensors; ++s) {
    int r = s / config.grid_cols, c = s % config.grid_cols;
    sensors.push_back({{"sensor_id", ids[s]},
                       {"latitude", 37.30 + 0.012 * r},
                       {"longitude", -121.90 + 0.016 * c}});
  }
  std::ofstream(dir / "sensors.json") << sensors.dump(2) << "\n";

  FILE* af = std::fopen((dir / "temporal_aux.csv").string().c_str(), "w");
  if (!af) throw Error(ErrKind::Io, "cannot write " + (dir / "temporal_aux.csv").string());
  std::fputs("timestamp,variable,field,value\n", af);
  const std::int64_t aux_steps =
      config.days * 1440 / std::max(1, config.aux_interval_minutes);
  for (std::int64_t step = 0; step < aux_steps; ++step) {
    Timestamp t = start->plus_minutes(step * config.aux_interval_minutes);
    std::string ts = format_timestamp(t);
    double tod = t.minute_of_day() / 1440.0;
    double temperature = 12.0 + 8.0 * std::sin(2.0 * M_PI * (tod - 0.25)) + rng.normal() * 1.5;
    double precipitation = std::max(0.0, rng.normal() * 2.0 - 2.5);
    const char* condition = precipitation > 0.5 ? "rain" : (temperature < 5.0 ? "cold" : "clear");
    std::fprintf(af, "%s,%s,temperature,%.2f\n", ts.c_str(), config.aux_variable.c_str(),
                 temperature);
    std::fprintf(af, "%s,%s,precipitation,%.2f\n", ts.c_str(), config.aux_variable.c_str(),
                 precipitation);
    std::fprintf(af, "%s,%s,condition,%s\n", ts.c_str(), config.aux_variable.c_str(), condition);
  }
  std::fclose(af);

  FILE* tf = std::fopen((dir / "anomalies.csv").string().c_str(), "w");
  if (!tf) throw Error(ErrKind::Io, "cannot write " + (dir / "anomalies.csv").string());
  std::fputs("sensor_id,timestamp,magnitude\n", tf);
  for (const auto& a : config.anomalies)
    std::fprintf(tf, "%s,%s,%.2f\n", a.sensor_id.c_str(), a.time.c_str(), a.magnitude_sigma);
  std::fclose(tf);

  json manifest = {{"region", config.region}, {"feature", config.feature},
                   {"start", config.start},   {"time_int", config.time_int},
                   {"n_steps", n_steps},      {"seed", seed}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

}  // namespace streason
