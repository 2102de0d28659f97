// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Run through ctest as "acceptance", or directly:
//   ./build/tests/acceptance

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "matching_oracle.hpp"
#include "streason/bench.hpp"
#include "streason/errors.hpp"
#include "streason/evalkit.hpp"
#include "streason/generator.hpp"
#include "streason/interpreter.hpp"

using namespace streason;
using namespace streason::testing;

namespace {

struct Harness {
  int failures = 0;

  void criterion(int index, const std::string& name, const std::function<void()>& body) {
    std::string detail;
    bool ok = true;
    try {
      body();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    std::printf("[%s] %2d. %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
};

void require(bool cond, const std::string& message) {
  if (!cond) throw std::runtime_error(message);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string shell_quote(const std::string& s) {
  return "'" + s + "'";
}

int run_command(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  Harness h;
  const std::string data_root = shared_dataset();
  Interpreter interp;
  const FunctionPool pool = default_pool();
  ExecContext ctx;
  ctx.data_root = data_root;

  h.criterion(1, "DSL round-trip over 1000 fuzzed programs in under 5 s", [&] {
    auto t0 = std::chrono::steady_clock::now();
    ProgramFuzzer fuzz(424242);
    for (int i = 0; i < 1000; ++i) {
      StProgram p = fuzz.next();
      StProgram q = parse_program(render_program(p));
      require(p == q, "round trip mismatch at program " + std::to_string(i));
    }
    double elapsed = ms_since(t0);
    require(elapsed < 5000.0, "took " + std::to_string(elapsed) + " ms");
  });

  h.criterion(2, "function pool matches the twelve transcribed signatures", [&] {
    const std::pair<const char*, std::vector<const char*>> signatures[] = {
        {"LOAD_SPATIOTEMPORAL_DATA",
         {"location", "time", "feature", "region", "time_int", "period", "unit", "task"}},
        {"LOAD_SPATIAL_AUX_DATA",
         {"spatial_var", "location", "time", "feature", "region", "time_int", "period", "unit",
          "constraint"}},
        {"LOAD_TEMPORAL_AUX_DATA",
         {"temp_var", "location", "time", "feature", "region", "time_int", "period", "unit",
          "constraint"}},
        {"IMPOSE_CONSTRAINTS",
         {"data", "time", "time_int", "period", "unit", "task", "constraint", "constraint_val",
          "preds"}},
        {"ANALYZE_TREND", {"data", "feature", "location", "time_int", "constraint", "output_var"}},
        {"ANALYZE_SEASONALITY", {"data", "time_int", "constraint"}},
        {"ANALYZE_NEIGHBOURHOOD", {"feature", "location", "region"}},
        {"GEN_EXPLANATION",
         {"task", "data", "feature", "location", "region", "time_int", "horizon", "horizon_unit",
          "constraint", "constraint_val", "trend", "seasonality", "neighbourhood", "preds",
          "sensitivity"}},
        {"DETECT_ANOMALY_ST_DATA",
         {"data", "spatial_aux_data", "temp_aux_data", "temp_reasoning", "spatial_reasoning",
          "location", "feature", "time_int", "constraint"}},
        {"FORECAST",
         {"data", "location", "time", "feature", "region", "time_int", "period", "unit",
          "horizon", "horizon_unit"}},
        {"CONDUCT_SENSITIVITY_ANALYSIS",
         {"data", "preds", "location", "time", "feature", "region", "time_int", "period", "unit",
          "horizon", "horizon_unit"}},
        {"REFINE_OUTPUT", {"var"}},
    };
    require(pool.size() == 12, "pool holds " + std::to_string(pool.size()) + " specs");
    for (const auto& [name, params] : signatures) {
      const FunctionSpec* spec = pool.find(name);
      require(spec != nullptr, std::string("missing ") + name);
      require(spec->params.size() == params.size(), std::string(name) + " arity differs");
      for (std::size_t i = 0; i < params.size(); ++i)
        require(spec->params[i].name == params[i],
                std::string(name) + " param " + std::to_string(i) + " is " +
                    spec->params[i].name);
    }
  });

  h.criterion(3, "golden programs execute with self-consistent answers", [&] {
    const std::string programs[] = {golden_analysis_program(), golden_anomaly_program(),
                                    golden_forecast_program()};
    for (const auto& text : programs) {
      StProgram program = parse_program(text);
      require(validate_against_pool(program, pool).empty(), "gold program fails validation");
      ExecutionResult result = interp.execute(program, pool, ctx);
      require(result.environment.rationale.size() == program.commands.size(),
              "rationale block count mismatch");
      GroundTruth truth = harvest_ground_truth(program, result);
      require(!truth.components.empty(), "no components harvested");
      require(score_constraint(result.answer, truth).score01 == 1, "constraint not 1");
      double factuality = score_factuality(result.answer, truth).ratio;
      require(factuality == 1.0,
              "factuality " + std::to_string(factuality) + " instead of 1.0");
    }
  });

  std::vector<ProgramMatch> matches;  // carried into criterion 5
  h.criterion(4, "match_programs equals the brute-force oracle on 200 perturbations", [&] {
    Rng rng(2900);
    for (int i = 0; i < 200; ++i) {
      StProgram gold = random_match_program(rng);
      StProgram cand = perturb_program(gold, rng);
      ProgramMatch m = match_programs(cand, gold);
      auto [tp, fp, fn] = MatchOracle::tp_fp_fn(cand, gold);
      require(m.tp == tp && m.fp == fp && m.fn_ == fn,
              "oracle disagreement at case " + std::to_string(i));
      matches.push_back(m);
    }
    // The worked example: drop step four of the six-step forecast golden.
    StProgram gold = parse_program(golden_forecast_program());
    StProgram cand = gold;
    cand.commands.erase(cand.commands.begin() + 3);
    ProgramMatch m = match_programs(cand, gold);
    require(m.tp == 5 && m.fp == 0 && m.fn_ == 1, "worked case counts off");
    require(m.precision == 1.0, "worked case precision");
    require(std::abs(m.recall - 5.0 / 6.0) < 1e-15, "worked case recall");
    require(std::abs(m.f1 - 10.0 / 11.0) < 1e-15, "worked case f1");
    matches.push_back(m);
  });

  h.criterion(5, "precision/recall/F1 identities hold to 1e-12 on every match", [&] {
    require(!matches.empty(), "criterion 4 produced no matches");
    for (const auto& m : matches) {
      double precision = (m.tp + m.fp) > 0 ? double(m.tp) / (m.tp + m.fp) : 1.0;
      double recall = (m.tp + m.fn_) > 0 ? double(m.tp) / (m.tp + m.fn_) : 1.0;
      double f1 = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
      require(std::abs(m.precision - precision) < 1e-12, "precision identity");
      require(std::abs(m.recall - recall) < 1e-12, "recall identity");
      require(std::abs(m.f1 - f1) < 1e-12, "f1 identity");
    }
  });

  h.criterion(6, "baseline post-processing reproduces the documented rules", [&] {
    require(postprocess_baseline({}, 7) == std::vector<double>(7, 0.0), "zero padding");
    require(postprocess_baseline({5.0, 6.0}, 4) == std::vector<double>{5.0, 6.0, 6.0, 6.0},
            "last-value repetition");
    std::vector<double> full{1, 2, 3};
    require(postprocess_baseline(full, 3) == full, "full input must pass through");
    Rng rng(64);
    for (int i = 0; i < 500; ++i) {
      int horizon = 1 + int(rng.below(30));
      std::vector<double> preds(rng.below(std::uint64_t(horizon) + 1), 1.5);
      require(postprocess_baseline(preds, horizon).size() == std::size_t(horizon),
              "length contract");
    }
  });

  h.criterion(7, "seasonal-naive beats the global mean on at least 9 of 10 seeds", [&] {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      TempDir dir("acc7_" + std::to_string(seed));
      SynthConfig cfg;
      cfg.days = 3;
      cfg.time_int = 60;
      cfg.grid_rows = 1;
      cfg.grid_cols = 1;
      cfg.sensor_ids = {"T1"};
      cfg.noise_sigma = 6.0;  // 10% of the base level
      cfg.weekly_amplitude = 0.0;
      cfg.weekend_shift = 0.0;
      cfg.anomalies.clear();
      synth_dataset(seed, cfg, dir.str());
      auto ds = Dataset::open(dir.str());

      Frame history;
      history.feature = "traffic speed";
      history.sensor_ids = {"T1"};
      history.time_int = 60;
      history.values.resize(48, 1);
      for (int r = 0; r < 48; ++r) {
        history.times.push_back(ds->start().plus_minutes(std::int64_t(r) * 60));
        history.values(r, 0) = ds->values()(r, 0);
      }
      auto preds = forecast(history, ForecastRequest{1, "days", "seasonal_naive"});
      std::vector<double> truth;
      for (int r = 48; r < 72; ++r) truth.push_back(ds->values()(r, 0));
      double sn_mae = forecast_error(preds.values, truth).mae;
      double mean = history.values.col(0).mean();
      double gm_mae =
          forecast_error(std::vector<double>(truth.size(), mean), truth).mae;
      wins += sn_mae < gm_mae ? 1 : 0;
    }
    require(wins >= 9, "seasonal-naive won only " + std::to_string(wins) + "/10");

    // Horizon-length contract across every unit.
    struct Case {
      int horizon;
      const char* unit;
      int time_int;
      int history_minutes;
      int expect;
    };
    const Case cases[] = {{35, "minutes", 5, 60, 7},   {2, "hours", 5, 1440, 24},
                          {1, "days", 60, 2880, 24},   {90, "minutes", 30, 360, 3},
                          {3, "hours", 15, 180, 12},   {2, "days", 120, 5760, 24}};
    Rng rng(7);
    for (const auto& c : cases) {
      std::vector<double> values;
      for (int i = 0; i < c.history_minutes / c.time_int; ++i)
        values.push_back(55 + rng.normal());
      Frame f = make_frame(values, "2017-01-02 00:00:00", c.time_int);
      auto p = forecast(f, ForecastRequest{c.horizon, c.unit, "auto"});
      require(int(p.values.size()) == c.expect,
              std::string("horizon contract for ") + std::to_string(c.horizon) + " " + c.unit);
    }
  });

  h.criterion(8, "anomaly recall >= 0.95 and precision >= 0.8 over 10 seeds", [&] {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
      TempDir dir("acc8_" + std::to_string(seed));
      SynthConfig cfg;
      cfg.days = 4;
      cfg.time_int = 60;
      cfg.grid_rows = 2;
      cfg.grid_cols = 2;
      cfg.sensor_ids.clear();
      cfg.noise_sigma = 3.0;
      cfg.weekly_amplitude = 0.0;
      cfg.weekend_shift = 0.0;

      // Twenty +-8-sigma injections on the target sensor, one slot each.
      Rng rng(seed * 31 + 7);
      std::vector<int> slots;
      for (int s = 0; s < 24; ++s) slots.push_back(s);
      rng.shuffle(slots);
      Timestamp start = *parse_timestamp(cfg.start);
      for (int k = 0; k < 20; ++k) {
        int day = int(rng.below(4));
        Timestamp t = start.plus_minutes(day * 1440 + slots[k] * 60);
        cfg.anomalies.push_back({"S0101", format_timestamp(t), k % 2 ? 8.0 : -8.0});
      }
      synth_dataset(seed, cfg, dir.str());
      auto ds = Dataset::open(dir.str());

      LoadRequest req;
      req.location = "S0101";
      req.time = start.plus_minutes(4 * 1440 - 60);
      req.time_int = 60;
      req.period = 4;
      req.unit = "days";
      req.task = "anomaly detection";
      Frame frame = load_st_data(*ds, req);
      AnomalyReport report = detect_anomaly(frame, nullptr, nullptr, AnomalyOptions{});

      std::set<std::int64_t> truth;
      for (const auto& a : ds->anomaly_truth())
        if (a.sensor_id == "S0101") truth.insert(a.time.epoch_seconds);
      std::set<std::int64_t> flagged;
      for (const auto& a : report.anomalies) flagged.insert(a.time.epoch_seconds);
      for (auto t : flagged) (truth.count(t) ? tp : fp) += 1;
      for (auto t : truth) fn += flagged.count(t) ? 0 : 1;

      // Monotonicity: a stricter threshold never flags more.
      AnomalyOptions strict;
      strict.z_threshold = 4.5;
      AnomalyReport tight = detect_anomaly(frame, nullptr, nullptr, strict);
      require(tight.anomalies.size() <= report.anomalies.size(), "threshold monotonicity");
      std::set<std::int64_t> tight_set;
      for (const auto& a : tight.anomalies) tight_set.insert(a.time.epoch_seconds);
      for (auto t : tight_set) require(flagged.count(t) == 1, "threshold set nesting");
    }
    double recall = double(tp) / double(tp + fn);
    double precision = double(tp) / double(tp + fp);
    std::ostringstream detail;
    detail << "recall " << recall << ", precision " << precision;
    require(recall >= 0.95, detail.str());
    require(precision >= 0.8, detail.str());
  });

  h.criterion(9, "max/min clamps bound every benchmark prediction; clamping idempotent", [&] {
    auto instances = make_default_bench(data_root, pool, interp);
    int checked = 0;
    for (const auto& inst : instances) {
      if (inst.task != TaskTag::Prediction) continue;
      StProgram program = parse_program(inst.gold_program);
      ExecutionResult result = interp.execute(program, pool, ctx);
      const PredictionSeries* final_preds = nullptr;
      for (auto it = program.commands.rbegin(); it != program.commands.rend(); ++it) {
        auto bound = result.environment.bindings.find(it->output_var);
        if (bound == result.environment.bindings.end()) continue;
        if (const auto* p = std::get_if<PredictionSeries>(&bound->second)) {
          final_preds = p;
          break;
        }
      }
      require(final_preds != nullptr, inst.id + ": no prediction series bound");
      require(!inst.ground_truth.constraints.empty(), inst.id + ": no clamp constraint");
      const auto& check = inst.ground_truth.constraints[0];
      for (double v : final_preds->values) {
        if (check.comparator == "<=")
          require(v <= check.value, inst.id + ": prediction exceeds the cap");
        else
          require(v >= check.value, inst.id + ": prediction under the floor");
      }
      ++checked;
    }
    require(checked == 10, "expected 10 prediction instances");

    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
      PredictionSeries preds;
      for (int i = 0; i < 8; ++i) preds.values.push_back(rng.normal() * 40 + 80);
      preds.clamped_mask.assign(8, false);
      auto once = impose_constraints(std::nullopt, preds, "max", 100.0);
      auto twice = impose_constraints(std::nullopt, *once.preds, "max", 100.0);
      require(once.preds->values == twice.preds->values &&
                  once.preds->clamped_mask == twice.preds->clamped_mask,
              "clamping not idempotent");
      for (double v : once.preds->values) require(v <= 100.0, "clamp bound violated");
    }
  });

  h.criterion(10, "selection variants meet their count contracts on the Fig-8 grid", [&] {
    auto examples = default_example_pool();
    for (int n : {6, 8, 10, 12, 14}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        for (TaskTag task : {TaskTag::Analysis, TaskTag::Anomaly, TaskTag::Prediction}) {
          PromptConfig cfg;
          cfg.n_examples = n;
          cfg.seed = seed;

          cfg.variant = SelectionVariant::Equal;
          auto equal = select_examples(examples, task, cfg);
          int counts[3] = {0, 0, 0};
          for (const auto& e : equal) counts[int(e.task_tag)]++;
          int lo = std::min({counts[0], counts[1], counts[2]});
          int hi = std::max({counts[0], counts[1], counts[2]});
          require(int(equal.size()) == n && hi - lo <= 1, "equal variant imbalance");

          cfg.variant = SelectionVariant::Include;
          auto include = select_examples(examples, task, cfg);
          int same = 0;
          for (const auto& e : include) same += e.task_tag == task;
          require(same == int(std::ceil(0.20 * n)), "include share off");

          cfg.variant = SelectionVariant::Exclude;
          auto exclude = select_examples(examples, task, cfg);
          for (const auto& e : exclude)
            require(e.task_tag != task, "exclude picked a same-task example");
          require(int(exclude.size()) == n, "exclude size off");
        }
      }
    }
  });

  h.criterion(11, "hermetic fixture bench: P/R/F1 1.0, constraint and factuality 100%", [&] {
    TempDir dir("acc11");
    auto instances_path = (dir.path() / "instances.json").string();
    auto fixtures_path = (dir.path() / "fixtures.json").string();
    auto report_path = (dir.path() / "report.json").string();

    auto instances = make_default_bench(data_root, pool, interp);
    save_instances(instances, instances_path);
    save_bench_fixtures(instances, fixtures_path);

    std::string cli = STREASON_CLI;
    std::string cmd = shell_quote(cli) + " bench " + shell_quote(instances_path) +
                      " --data-root " + shell_quote(data_root) + " --use-gen --fixtures " +
                      shell_quote(fixtures_path) + " --examples " +
                      shell_quote(std::string(STREASON_SOURCE_DIR) +
                                  "/config/example_pool.json") +
                      " --jobs 4 --report " + shell_quote(report_path) + " > " +
                      shell_quote((dir.path() / "stdout.txt").string()) + " 2>&1";
    auto t0 = std::chrono::steady_clock::now();
    require(run_command(cmd) == 0, "bench subcommand failed");
    double elapsed = ms_since(t0);
    require(elapsed < 60000.0, "bench took " + std::to_string(elapsed) + " ms");

    std::ifstream rin(report_path);
    auto doc = nlohmann::json::parse(rin);
    auto overall = doc["aggregate"]["overall"];
    require(overall["instances"] == 30, "instance count");
    require(overall["precision"] == 1.0 && overall["recall"] == 1.0 && overall["f1"] == 1.0,
            "program match below 1.0");
    require(overall["constraint_pct"] == 100.0, "constraint below 100%");
    require(overall["factuality_pct"] == 100.0, "factuality below 100%");
  });

  h.criterion(12, "seasonality and trend numeric checks", [&] {
    // Pure daily sinusoid scores 1.0.
    std::vector<double> clean;
    for (int i = 0; i < 7 * 288; ++i)
      clean.push_back(60 + 20 * std::sin(2 * M_PI * (i % 288) / 288.0));
    Frame f = make_frame(clean, "2017-01-02 00:00:00", 5);
    auto season = analyze_seasonality(f);
    require(std::abs(season.daily_strength - 1.0) <= 1e-6, "pure sinusoid strength");

    // Noiseless linear trend, slope checked against a closed-form oracle.
    std::vector<double> line;
    for (int i = 0; i < 200; ++i) line.push_back(3.0 + 1.25 * i);
    Frame lf = make_frame(line, "2017-01-02 00:00:00", 60);
    auto trend = analyze_trend(lf);
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (int i = 0; i < 200; ++i) {
      double t = double(i);
      st += t;
      sy += line[i];
      stt += t * t;
      sty += t * line[i];
    }
    double oracle = (sty - st * sy / 200.0) / (stt - st * st / 200.0);
    require(std::abs(trend.slope - oracle) <= 1e-9, "slope differs from the OLS oracle");
    require(trend.direction == "increasing", "direction");

    // Shuffling destroys the daily structure.
    Rng rng(17);
    Frame noisy = f;
    for (int r = 0; r < int(noisy.rows()); ++r) noisy.values(r, 0) += rng.normal();
    require(analyze_seasonality(noisy).daily_strength > 0.9, "base strength too low");
    std::vector<double> values(noisy.rows());
    for (int r = 0; r < int(noisy.rows()); ++r) values[r] = noisy.values(r, 0);
    for (int i = 0; i < 50; ++i) {
      rng.shuffle(values);
      Frame shuffled = make_frame(values, "2017-01-02 00:00:00", 5);
      require(analyze_seasonality(shuffled).daily_strength < 0.3, "shuffled strength");
    }
  });

  if (h.failures == 0) {
    std::printf("acceptance: all 12 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", h.failures);
  return 1;
}
