#include "streason/bench.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "streason/errors.hpp"
#include "streason/util.hpp"

using nlohmann::json;

namespace streason {

namespace {

json truth_to_json(const GroundTruth& truth) {
  json constraints = json::array();
  for (const auto& c : truth.constraints)
    constraints.push_back({{"description", c.description},
                           {"field", c.field},
                           {"comparator", c.comparator},
                           {"value", c.value}});
  json components = json::array();
  for (const auto& c : truth.components) {
    json entry = {{"name", c.name}, {"tolerance", c.tolerance}};
    if (const double* d = std::get_if<double>(&c.expected))
      entry["expected"] = *d;
    else
      entry["expected"] = std::get<std::string>(c.expected);
    if (!c.synonyms.empty()) entry["synonyms"] = c.synonyms;
    components.push_back(entry);
  }
  return {{"constraints", constraints},
          {"components", components},
          {"reference_answer", truth.reference_answer}};
}

GroundTruth truth_from_json(const json& doc) {
  GroundTruth truth;
  for (const auto& c : doc.value("constraints", json::array()))
    truth.constraints.push_back({c.value("description", ""), c.at("field").get<std::string>(),
                                 c.at("comparator").get<std::string>(),
                                 c.at("value").get<double>()});
  for (const auto& c : doc.value("components", json::array())) {
    ComponentSpec spec;
    spec.name = c.at("name").get<std::string>();
    if (c.at("expected").is_number())
      spec.expected = c.at("expected").get<double>();
    else
      spec.expected = c.at("expected").get<std::string>();
    spec.tolerance = c.value("tolerance", 0.0);
    if (c.contains("synonyms")) spec.synonyms = c["synonyms"].get<std::vector<std::string>>();
    truth.components.push_back(std::move(spec));
  }
  truth.reference_answer = doc.value("reference_answer", "");
  return truth;
}

}  // namespace

std::vector<BenchInstance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "cannot open instances file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, std::string("instances file: ") + e.what());
  }
  std::vector<BenchInstance> out;
  try {
    for (const auto& i : doc.at("instances")) {
      BenchInstance inst;
      inst.id = i.at("id").get<std::string>();
      auto tag = task_tag_from_name(i.at("task").get<std::string>());
      if (!tag)
        throw Error(ErrKind::Format, "unknown task '" + i.at("task").get<std::string>() + "'");
      inst.task = *tag;
      inst.query = i.at("query").get<std::string>();
      inst.gold_program = i.at("gold_program").get<std::string>();
      inst.ground_truth = truth_from_json(i.at("ground_truth"));
      out.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, std::string("instances file: ") + e.what());
  }
  return out;
}

void save_instances(const std::vector<BenchInstance>& instances, const std::string& path) {
  json arr = json::array();
  for (const auto& inst : instances)
    arr.push_back({{"id", inst.id},
                   {"task", task_tag_name(inst.task)},
                   {"query", inst.query},
                   {"gold_program", inst.gold_program},
                   {"ground_truth", truth_to_json(inst.ground_truth)}});
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "cannot write instances file " + path);
  out << json{{"instances", arr}}.dump(2) << "\n";
}

namespace {

struct AnalysisSpec {
  const char* location;
  const char* time;
  int period_days;
  const char* constraint;  // "" for none
};

struct AnomalySpec {
  const char* location;
  const char* time;
  int period_days;
};

struct PredictionSpec {
  const char* location;
  const char* time;
  int horizon_minutes;
  const char* kind;  // max | min
  double value;
};

std::string analysis_program(const AnalysisSpec& s) {
  std::ostringstream os;
  std::string constraint_arg =
      *s.constraint ? ", constraint=\"" + std::string(s.constraint) + "\"" : "";
  os << "DATA = LOAD_SPATIOTEMPORAL_DATA(location=\"" << s.location << "\", time=\"" << s.time
     << "\", feature=\"traffic speed\", region=\"BAY\", time_int=5, period=" << s.period_days
     << ", unit=\"days\", task=\"analysis\")\n";
  os << "TREND = ANALYZE_TREND(data=DATA, feature=\"traffic speed\", location=\"" << s.location
     << "\", time_int=5" << constraint_arg << ", output_var=\"TREND\")\n";
  os << "SEASONALITY = ANALYZE_SEASONALITY(data=DATA, time_int=5" << constraint_arg << ")\n";
  os << "NEIGHBOURS = ANALYZE_NEIGHBOURHOOD(feature=\"traffic speed\", location=\"" << s.location
     << "\", region=\"BAY\")\n";
  os << "EXPL = GEN_EXPLANATION(task=\"analysis\", data=DATA, feature=\"traffic speed\", "
        "location=\""
     << s.location << "\", region=\"BAY\", time_int=5" << constraint_arg
     << ", trend=TREND, seasonality=SEASONALITY, neighbourhood=NEIGHBOURS)\n";
  os << "ANS = REFINE_OUTPUT(var=EXPL)\n";
  return os.str();
}

std::string anomaly_program(const AnomalySpec& s) {
  std::ostringstream os;
  std::string common = std::string("location=\"") + s.location + "\", time=\"" + s.time +
                       "\", feature=\"traffic speed\", region=\"BAY\", time_int=5, period=" +
                       std::to_string(s.period_days) + ", unit=\"days\"";
  os << "DATA = LOAD_SPATIOTEMPORAL_DATA(" << common << ", task=\"anomaly detection\")\n";
  os << "SPATIAL = LOAD_SPATIAL_AUX_DATA(spatial_var=\"neighbourhood\", " << common << ")\n";
  os << "WEATHER = LOAD_TEMPORAL_AUX_DATA(temp_var=\"weather\", " << common << ")\n";
  os << "ANOMALIES = DETECT_ANOMALY_ST_DATA(data=DATA, spatial_aux_data=SPATIAL, "
        "temp_aux_data=WEATHER, temp_reasoning=1, spatial_reasoning=1, location=\""
     << s.location << "\", feature=\"traffic speed\", time_int=5)\n";
  os << "ANS = REFINE_OUTPUT(var=ANOMALIES)\n";
  return os.str();
}

std::string prediction_program(const PredictionSpec& s) {
  std::ostringstream os;
  std::string common = std::string("location=\"") + s.location + "\", time=\"" + s.time +
                       "\", feature=\"traffic speed\", region=\"BAY\", time_int=5, period=1, "
                       "unit=\"hours\"";
  os << "DATA = LOAD_SPATIOTEMPORAL_DATA(" << common << ", task=\"prediction\")\n";
  os << "PREDS = FORECAST(data=DATA, " << common << ", horizon=" << s.horizon_minutes
     << ", horizon_unit=\"minutes\")\n";
  os << "CAPPED = IMPOSE_CONSTRAINTS(data=DATA, time=\"" << s.time
     << "\", time_int=5, period=1, unit=\"hours\", task=\"prediction\", constraint=\"" << s.kind
     << "\", constraint_val=" << format_number(s.value) << ", preds=PREDS)\n";
  os << "SENS = CONDUCT_SENSITIVITY_ANALYSIS(data=DATA, preds=PREDS, " << common
     << ", horizon=" << s.horizon_minutes << ", horizon_unit=\"minutes\")\n";
  os << "EXPL = GEN_EXPLANATION(task=\"prediction\", data=DATA, feature=\"traffic speed\", "
        "location=\""
     << s.location << "\", region=\"BAY\", time_int=5, horizon=" << s.horizon_minutes
     << ", horizon_unit=\"minutes\", constraint=\"" << s.kind
     << "\", constraint_val=" << format_number(s.value) << ", preds=CAPPED, sensitivity=SENS)\n";
  os << "ANS = REFINE_OUTPUT(var=EXPL)\n";
  return os.str();
}

std::string analysis_query(const AnalysisSpec& s) {
  std::ostringstream os;
  os << "Perform a trend, seasonality, and neighbourhood analysis of the historical traffic "
        "speed data for the past "
     << s.period_days << " days at location " << s.location << " in the BAY region";
  if (std::string(s.constraint) == "weekdays") os << ", focusing on weekdays only";
  if (std::string(s.constraint) == "weekends") os << ", focusing on weekends only";
  os << ". Analyze the Trend Significance, Daily Seasonality Strength, Weekly Seasonality "
        "Strength, and Neighbours. The data is recorded at 5-minute intervals and the current "
        "time is "
     << s.time << ".";
  return os.str();
}

std::string anomaly_query(const AnomalySpec& s) {
  std::ostringstream os;
  os << "Identify any anomalies in the traffic speed data at location " << s.location
     << " in the BAY region over the past " << s.period_days
     << " days, taking concurrent weather conditions and neighbouring sensors into account. "
        "The data is recorded at 5-minute intervals and the current time is "
     << s.time << ".";
  return os.str();
}

std::string prediction_query(const PredictionSpec& s) {
  std::ostringstream os;
  os << "What will be the traffic speed at location " << s.location
     << " in the BAY region for the next " << s.horizon_minutes
     << " minutes, based on historical data from the past 1 hour recorded at 5-minute "
        "intervals? The current time is "
     << s.time << ". Please ensure that the predicted traffic speed "
     << (std::string(s.kind) == "max" ? "does not exceed " : "stays at or above ")
     << format_number(s.value)
     << " km/h. Also, analyze how daily timestamps and neighbouring sensors impact the "
        "accuracy of traffic speed predictions.";
  return os.str();
}

const AnalysisSpec kAnalysisSpecs[] = {
    {"402117", "2017-03-04 01:40:00", 90, "weekdays"},
    {"400017", "2017-02-20 12:00:00", 60, ""},
    {"403225", "2017-01-15 08:00:00", 30, "weekends"},
    {"405619", "2017-02-28 18:30:00", 45, "weekdays"},
    {"400001", "2017-01-31 06:00:00", 30, ""},
    {"407154", "2017-03-01 22:15:00", 60, "weekdays"},
    {"409524", "2017-02-10 04:45:00", 30, ""},
    {"410810", "2017-03-05 10:20:00", 90, ""},
    {"401890", "2017-02-05 14:10:00", 21, "weekends"},
    {"411912", "2017-01-20 09:35:00", 14, "weekdays"},
};

const AnomalySpec kAnomalySpecs[] = {
    {"401846", "2017-01-20 00:00:00", 4}, {"402056", "2017-02-10 00:00:00", 4},
    {"404370", "2017-01-28 00:00:00", 5}, {"408907", "2017-02-24 00:00:00", 4},
    {"400030", "2017-02-17 00:00:00", 3}, {"411912", "2017-01-12 00:00:00", 3},
    {"403225", "2017-02-03 00:00:00", 4}, {"401846", "2017-01-19 12:00:00", 3},
    {"400030", "2017-02-16 12:00:00", 4}, {"409524", "2017-02-14 03:00:00", 3},
};

const PredictionSpec kPredictionSpecs[] = {
    {"409524", "2017-02-14 03:00:00", 35, "max", 100.0},
    {"400017", "2017-02-01 08:00:00", 30, "max", 95.0},
    {"403225", "2017-01-25 17:30:00", 60, "max", 90.0},
    {"402117", "2017-02-22 07:45:00", 45, "max", 100.0},
    {"405619", "2017-03-02 12:15:00", 35, "max", 65.0},
    {"408907", "2017-01-10 09:00:00", 30, "min", 40.0},
    {"400045", "2017-02-09 16:20:00", 35, "max", 100.0},
    {"407154", "2017-02-27 11:05:00", 60, "max", 85.0},
    {"410810", "2017-01-18 14:50:00", 45, "max", 95.0},
    {"401890", "2017-03-06 06:30:00", 30, "max", 100.0},
};

const AnalysisSpec kAnalysisExamples[] = {
    {"400030", "2017-02-11 10:00:00", 30, "weekdays"},
    {"401846", "2017-03-03 16:30:00", 60, ""},
    {"402056", "2017-01-22 11:00:00", 21, "weekends"},
    {"404370", "2017-02-18 09:15:00", 45, ""},
    {"408907", "2017-03-07 20:00:00", 90, "weekdays"},
    {"400045", "2017-01-28 13:45:00", 14, ""},
    {"410810", "2017-02-25 07:30:00", 30, "weekends"},
};

const AnomalySpec kAnomalyExamples[] = {
    {"400001", "2017-01-08 00:00:00", 3}, {"402117", "2017-02-12 00:00:00", 4},
    {"403225", "2017-03-01 00:00:00", 3}, {"405619", "2017-01-30 06:00:00", 4},
    {"407154", "2017-02-20 12:00:00", 3}, {"409524", "2017-01-17 18:00:00", 4},
    {"411912", "2017-02-27 00:00:00", 5},
};

const PredictionSpec kPredictionExamples[] = {
    {"400001", "2017-01-12 07:00:00", 30, "max", 100.0},
    {"401890", "2017-02-04 17:25:00", 35, "max", 95.0},
    {"402117", "2017-01-19 08:40:00", 60, "max", 90.0},
    {"404370", "2017-02-23 15:10:00", 45, "max", 100.0},
    {"405619", "2017-03-05 11:55:00", 30, "min", 35.0},
    {"408907", "2017-01-26 19:20:00", 35, "max", 85.0},
    {"411912", "2017-02-08 06:05:00", 60, "max", 100.0},
};

}  // namespace

std::vector<ExamplePair> default_example_pool() {
  std::vector<ExamplePair> pool;
  for (const auto& s : kAnalysisExamples)
    pool.push_back({analysis_query(s), analysis_program(s), TaskTag::Analysis});
  for (const auto& s : kAnomalyExamples)
    pool.push_back({anomaly_query(s), anomaly_program(s), TaskTag::Anomaly});
  for (const auto& s : kPredictionExamples)
    pool.push_back({prediction_query(s), prediction_program(s), TaskTag::Prediction});
  return pool;
}

std::string golden_analysis_program() {
  return analysis_program(kAnalysisSpecs[0]);
}

std::string golden_anomaly_program() {
  return anomaly_program(kAnomalySpecs[0]);
}

std::string golden_forecast_program() {
  return prediction_program(kPredictionSpecs[0]);
}

GroundTruth harvest_ground_truth(const StProgram& program, const ExecutionResult& result) {
  GroundTruth truth;
  truth.reference_answer = result.answer;

  // Machine-checkable constraints come from max/min clamps in the program.
  for (const auto& cmd : program.commands) {
    if (cmd.module_name != "IMPOSE_CONSTRAINTS") continue;
    const ArgValue* cv = cmd.find_arg("constraint");
    const ArgValue* vv = cmd.find_arg("constraint_val");
    if (!cv || !vv) continue;
    const auto* kind = std::get_if<Literal>(cv);
    const auto* val = std::get_if<Literal>(vv);
    if (!kind || kind->kind != Literal::Kind::Text || !val) continue;
    double threshold = val->kind == Literal::Kind::Integer ? static_cast<double>(val->integer)
                                                           : val->real;
    if (kind->text == "max")
      truth.constraints.push_back({"predictions must not exceed " + format_number(threshold),
                                   "maximum predicted value", "<=", threshold});
    else if (kind->text == "min")
      truth.constraints.push_back({"predictions must stay at or above " + format_number(threshold),
                                   "minimum predicted value", ">=", threshold});
  }

  // Components: the final explanation's map, or the anomaly report's fields.
  const Value* final_value = nullptr;
  for (auto it = program.commands.rbegin(); it != program.commands.rend(); ++it) {
    auto bound = result.environment.bindings.find(it->output_var);
    if (bound == result.environment.bindings.end()) continue;
    if (std::holds_alternative<Explanation>(bound->second) ||
        std::holds_alternative<AnomalyReport>(bound->second)) {
      final_value = &bound->second;
      break;
    }
  }
  if (!final_value) return truth;

  if (const auto* expl = std::get_if<Explanation>(final_value)) {
    for (const auto& [name, value] : expl->components) {
      ComponentSpec spec;
      spec.name = name;
      if (const double* d = std::get_if<double>(&value)) {
        spec.expected = printed_value(*d);
        spec.tolerance = 1e-6;
      } else {
        spec.expected = std::get<std::string>(value);
      }
      truth.components.push_back(std::move(spec));
    }
  } else if (const auto* report = std::get_if<AnomalyReport>(final_value)) {
    ComponentSpec count;
    count.name = "anomalies flagged";
    count.expected = static_cast<double>(report->anomalies.size());
    count.tolerance = 0.0;
    truth.components.push_back(std::move(count));
    int idx = 1;
    for (const auto& a : report->anomalies) {
      std::string tag = "anomaly " + std::to_string(idx++);
      truth.components.push_back({tag, format_timestamp(a.time), 0.0, {}});
      truth.components.push_back(
          {tag + " observed", printed_value(a.observed), 1e-6, {}});
      truth.components.push_back({tag + " classification", a.classification, 0.0, {}});
    }
  }
  return truth;
}

std::vector<BenchInstance> make_default_bench(const std::string& data_root,
                                              const FunctionPool& pool,
                                              const Interpreter& interp) {
  ExecContext ctx;
  ctx.data_root = data_root;

  std::vector<BenchInstance> instances;
  auto add = [&](const std::string& id, TaskTag task, std::string query, std::string program) {
    BenchInstance inst;
    inst.id = id;
    inst.task = task;
    inst.query = std::move(query);
    inst.gold_program = std::move(program);
    StProgram parsed = parse_program(inst.gold_program);
    auto issues = validate_against_pool(parsed, pool);
    if (!issues.empty())
      throw Error(ErrKind::Config, "gold program for " + id + " invalid: " + describe(issues[0]));
    ExecutionResult result = interp.execute(parsed, pool, ctx);
    inst.ground_truth = harvest_ground_truth(parsed, result);
    instances.push_back(std::move(inst));
  };

  char id[32];
  for (std::size_t i = 0; i < std::size(kAnalysisSpecs); ++i) {
    std::snprintf(id, sizeof(id), "analysis-%02zu", i + 1);
    add(id, TaskTag::Analysis, analysis_query(kAnalysisSpecs[i]),
        analysis_program(kAnalysisSpecs[i]));
  }
  for (std::size_t i = 0; i < std::size(kAnomalySpecs); ++i) {
    std::snprintf(id, sizeof(id), "anomaly-%02zu", i + 1);
    add(id, TaskTag::Anomaly, anomaly_query(kAnomalySpecs[i]), anomaly_program(kAnomalySpecs[i]));
  }
  for (std::size_t i = 0; i < std::size(kPredictionSpecs); ++i) {
    std::snprintf(id, sizeof(id), "prediction-%02zu", i + 1);
    add(id, TaskTag::Prediction, prediction_query(kPredictionSpecs[i]),
        prediction_program(kPredictionSpecs[i]));
  }
  return instances;
}

void save_bench_fixtures(const std::vector<BenchInstance>& instances, const std::string& path) {
  json arr = json::array();
  for (const auto& inst : instances)
    arr.push_back({{"query", inst.query}, {"completion", inst.gold_program}});
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "cannot write fixtures file " + path);
  out << json{{"fixtures", arr}}.dump(2) << "\n";
}

namespace {

// Actual future values for the window the gold FORECAST step predicts.
std::optional<std::vector<double>> actual_future(const StProgram& gold, const ExecContext& ctx,
                                                 int* steps_out) {
  for (const auto& cmd : gold.commands) {
    if (cmd.module_name != "FORECAST") continue;
    auto text_of = [&](const char* name) -> std::optional<std::string> {
      const ArgValue* av = cmd.find_arg(name);
      if (!av) return std::nullopt;
      const auto* lit = std::get_if<Literal>(av);
      if (!lit) return std::nullopt;
      if (lit->kind == Literal::Kind::Text) return lit->text;
      if (lit->kind == Literal::Kind::Timestamp) return format_timestamp(lit->ts);
      return std::nullopt;
    };
    auto int_of = [&](const char* name) -> std::optional<std::int64_t> {
      const ArgValue* av = cmd.find_arg(name);
      if (!av) return std::nullopt;
      const auto* lit = std::get_if<Literal>(av);
      if (!lit || lit->kind != Literal::Kind::Integer) return std::nullopt;
      return lit->integer;
    };
    auto location = text_of("location");
    auto time_text = text_of("time");
    auto time_int = int_of("time_int");
    auto horizon = int_of("horizon");
    auto horizon_unit = text_of("horizon_unit");
    if (!location || !time_text || !time_int || !horizon || !horizon_unit) return std::nullopt;
    auto t = parse_timestamp(*time_text);
    if (!t) return std::nullopt;

    std::int64_t horizon_min = period_to_minutes(*horizon, *horizon_unit);
    int steps = static_cast<int>(horizon_min / *time_int);
    if (steps < 1) return std::nullopt;
    if (steps_out) *steps_out = steps;

    LoadRequest req;
    req.location = *location;
    req.time = t->plus_minutes(horizon_min);
    req.feature = "";
    req.region = "";
    req.time_int = static_cast<int>(*time_int);
    req.period = horizon_min;
    req.unit = "minutes";
    req.task = "analysis";  // target column only
    try {
      Frame actual = load_st_data(*Dataset::open(ctx.data_root), req);
      std::vector<double> out;
      for (std::size_t r = 0; r < actual.rows(); ++r)
        out.push_back(actual.values(static_cast<Eigen::Index>(r), 0));
      return out;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Latest prediction series bound by the executed program.
std::optional<std::vector<double>> extracted_predictions(const StProgram& program,
                                                         const ExecutionResult& result) {
  for (auto it = program.commands.rbegin(); it != program.commands.rend(); ++it) {
    auto bound = result.environment.bindings.find(it->output_var);
    if (bound == result.environment.bindings.end()) continue;
    if (const auto* preds = std::get_if<PredictionSeries>(&bound->second)) return preds->values;
  }
  return std::nullopt;
}

Aggregate aggregate_of(const std::vector<const InstanceResult*>& results, bool judged) {
  Aggregate agg;
  agg.instances = static_cast<int>(results.size());
  if (results.empty()) return agg;
  double constraint = 0, factuality = 0, coherence = 0, p = 0, r = 0, f1 = 0;
  double mae = 0, rmse = 0;
  int coherence_n = 0, forecast_n = 0;
  for (const auto* res : results) {
    constraint += res->constraint_score;
    factuality += res->factuality_score;
    p += res->match.precision;
    r += res->match.recall;
    f1 += res->match.f1;
    if (res->coherence_score) {
      coherence += *res->coherence_score;
      ++coherence_n;
    }
    if (res->forecast) {
      mae += res->forecast->mae;
      rmse += res->forecast->rmse;
      ++forecast_n;
    }
  }
  double n = static_cast<double>(results.size());
  agg.constraint_pct = constraint / n * 100.0;
  agg.factuality_pct = factuality / n * 100.0;
  if (judged && coherence_n > 0)
    agg.coherence_pct = coherence / coherence_n / 3.0 * 100.0;  // 3-point scale to percent
  agg.precision = p / n;
  agg.recall = r / n;
  agg.f1 = f1 / n;
  if (forecast_n > 0) {
    agg.mae = mae / forecast_n;
    agg.rmse = rmse / forecast_n;
  }
  return agg;
}

}  // namespace

BenchReport run_bench(const std::vector<BenchInstance>& instances, const FunctionPool& pool,
                      const std::vector<ExamplePair>& example_pool, const Interpreter& interp,
                      const BenchOptions& opts) {
  BenchReport report;
  report.results.resize(instances.size());

  auto run_one = [&](std::size_t idx) {
    const BenchInstance& inst = instances[idx];
    InstanceResult& out = report.results[idx];
    out.id = inst.id;
    out.task = inst.task;

    StProgram gold, candidate;
    bool have_candidate = false;
    try {
      gold = parse_program(inst.gold_program);
    } catch (const Error& e) {
      out.error = std::string("gold program: ") + e.what();
      return;
    }
    if (opts.generator_backend) {
      try {
        GenerationRecord record = generate_program(inst.query, inst.task, example_pool, pool,
                                                   opts.prompt, *opts.generator_backend);
        if (record.program) {
          candidate = *record.program;
          have_candidate = true;
        } else {
          out.error = record.parse_error;
        }
      } catch (const Error& e) {
        out.error = e.what();
      }
    } else {
      candidate = gold;
      have_candidate = true;
    }

    out.match = match_programs(candidate, gold);

    if (have_candidate) {
      auto issues = validate_against_pool(candidate, pool);
      if (!issues.empty()) {
        out.error = describe(issues.front());
      } else {
        try {
          ExecutionResult exec = interp.execute(candidate, pool, opts.ctx);
          out.answer = exec.answer;
          if (inst.task == TaskTag::Prediction) {
            int steps = 0;
            auto actual = actual_future(gold, opts.ctx, &steps);
            if (actual && steps > 0) {
              auto preds = extracted_predictions(candidate, exec).value_or(std::vector<double>{});
              out.forecast = forecast_error(postprocess_baseline(preds, steps), *actual);
            }
          }
        } catch (const Error& e) {
          out.error = e.what();
        }
      }
    }

    try {
      auto cs = score_constraint(out.answer, inst.ground_truth, opts.judge,
                                 opts.constraint_prompt, inst.query);
      out.constraint_score = cs.score01;
      out.constraint_detail = cs.detail;
      auto fs = score_factuality(out.answer, inst.ground_truth, opts.judge,
                                 opts.factuality_prompt, inst.query);
      out.factuality_score = fs.ratio;
      out.factuality_detail = fs.detail;
      if (opts.judge)
        out.coherence_score = score_coherence(out.answer, *opts.judge, opts.coherence_prompt,
                                              inst.query);
    } catch (const Error& e) {
      if (out.error.empty()) out.error = e.what();
    }
  };

  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(instances.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < instances.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < instances.size(); i = next.fetch_add(1))
          run_one(i);
      });
    for (auto& t : workers) t.join();
  }

  std::vector<const InstanceResult*> all;
  std::map<std::string, std::vector<const InstanceResult*>> by_task;
  for (const auto& res : report.results) {
    all.push_back(&res);
    by_task[task_tag_name(res.task)].push_back(&res);
  }
  report.overall = aggregate_of(all, opts.judge != nullptr);
  for (const char* task : {"analysis", "anomaly", "prediction"})
    if (by_task.count(task))
      report.per_task.emplace_back(task, aggregate_of(by_task[task], opts.judge != nullptr));
  return report;
}

std::string BenchReport::summary_table() const {
  std::ostringstream os;
  os << "scope,instances,constraint_pct,factuality_pct,coherence_pct,precision,recall,f1,mae,"
        "rmse\n";
  auto row = [&os](const std::string& scope, const Aggregate& a) {
    os << scope << "," << a.instances << "," << format_number(a.constraint_pct) << ","
       << format_number(a.factuality_pct) << ","
       << (a.coherence_pct ? format_number(*a.coherence_pct) : "") << ","
       << format_number(a.precision) << "," << format_number(a.recall) << ","
       << format_number(a.f1) << "," << (a.mae ? format_number(*a.mae) : "") << ","
       << (a.rmse ? format_number(*a.rmse) : "") << "\n";
  };
  row("overall", overall);
  for (const auto& [task, agg] : per_task) row(task, agg);
  return os.str();
}

void save_report(const BenchReport& report, const std::string& path) {
  json results = json::array();
  for (const auto& r : report.results) {
    json steps = json::array();
    for (const auto& s : r.match.per_step) {
      const char* status = s.status == StepStatus::Match     ? "match"
                           : s.status == StepStatus::Wrong   ? "wrong"
                           : s.status == StepStatus::Missing ? "missing"
                                                             : "extra";
      steps.push_back({{"index", s.index}, {"status", status}});
    }
    json entry = {{"id", r.id},
                  {"task", task_tag_name(r.task)},
                  {"program_match",
                   {{"tp", r.match.tp},
                    {"fp", r.match.fp},
                    {"fn", r.match.fn_},
                    {"precision", r.match.precision},
                    {"recall", r.match.recall},
                    {"f1", r.match.f1},
                    {"per_step", steps}}},
                  {"constraint_score", r.constraint_score},
                  {"constraint_detail", r.constraint_detail},
                  {"factuality_score", r.factuality_score},
                  {"factuality_detail", r.factuality_detail},
                  {"error", r.error}};
    if (r.coherence_score) entry["coherence_score"] = *r.coherence_score;
    if (r.forecast) {
      entry["mae"] = r.forecast->mae;
      entry["rmse"] = r.forecast->rmse;
    }
    results.push_back(entry);
  }
  auto agg_json = [](const Aggregate& a) {
    json j = {{"instances", a.instances},   {"constraint_pct", a.constraint_pct},
              {"factuality_pct", a.factuality_pct}, {"precision", a.precision},
              {"recall", a.recall},         {"f1", a.f1}};
    if (a.coherence_pct) j["coherence_pct"] = *a.coherence_pct;
    if (a.mae) j["mae"] = *a.mae;
    if (a.rmse) j["rmse"] = *a.rmse;
    return j;
  };
  json per_task = json::object();
  for (const auto& [task, agg] : report.per_task) per_task[task] = agg_json(agg);
  json doc = {{"results", results},
              {"aggregate", {{"overall", agg_json(report.overall)}, {"per_task", per_task}}}};
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "cannot write report " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace streason
