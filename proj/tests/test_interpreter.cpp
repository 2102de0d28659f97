#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "helpers.hpp"
#include "streason/bench.hpp"
#include "streason/errors.hpp"
#include "streason/interpreter.hpp"

using namespace streason;
using streason::testing::shared_dataset;

namespace {

ExecContext ctx_for_shared() {
  ExecContext ctx;
  ctx.data_root = shared_dataset();
  return ctx;
}

}  // namespace

TEST_CASE("default dispatch table registers exactly the twelve modules") {
  Interpreter interp;
  CHECK(interp.module_count() == 12);
  auto pool = default_pool();
  for (const auto& spec : pool.specs()) CHECK(interp.has_module(spec.name));
}

TEST_CASE("golden forecast program: capped predictions and a six-block rationale") {
  Interpreter interp;
  auto pool = default_pool();
  auto program = parse_program(golden_forecast_program());
  REQUIRE(validate_against_pool(program, pool).empty());
  auto result = interp.execute(program, pool, ctx_for_shared());

  CHECK(result.answer.find("Prediction 7") != std::string::npos);
  for (int i = 1; i <= 7; ++i) {
    auto v = extract_number_near(result.answer, "prediction " + std::to_string(i));
    REQUIRE(v.has_value());
    CHECK(*v <= 100.0);
  }
  CHECK(result.environment.rationale.size() == 6);
  int blocks = 0;
  for (const auto& line : split_lines(result.rationale)) blocks += line.rfind("Step ", 0) == 0;
  CHECK(blocks == 6);
  CHECK(result.timings.size() == 6);

  // Answer equals refine_output of the final command's bound value.
  const Value& final_value = result.environment.bindings.at("ANS");
  REQUIRE(std::holds_alternative<TextValue>(final_value));
  CHECK(std::get<TextValue>(final_value).text == result.answer);
}

TEST_CASE("single REFINE_OUTPUT with a literal text value is the identity pipeline") {
  Interpreter interp;
  auto pool = default_pool();
  auto program = parse_program("ANS = REFINE_OUTPUT(var=\"all clear\")");
  auto result = interp.execute(program, pool, ctx_for_shared());
  CHECK(result.answer == "all clear");
}

TEST_CASE("fail-fast: an out-of-range step stops execution with partial rationale") {
  Interpreter interp;
  auto pool = default_pool();
  // Step 3 requests a window that starts before the dataset.
  auto program = parse_program(
      "D1 = LOAD_SPATIOTEMPORAL_DATA(location=\"402117\", time=\"2017-01-10 00:00:00\", "
      "feature=\"traffic speed\", region=\"BAY\", time_int=5, period=1, unit=\"hours\", "
      "task=\"analysis\")\n"
      "T = ANALYZE_TREND(data=D1, feature=\"traffic speed\", location=\"402117\", time_int=5)\n"
      "D2 = LOAD_SPATIOTEMPORAL_DATA(location=\"402117\", time=\"2016-12-02 00:00:00\", "
      "feature=\"traffic speed\", region=\"BAY\", time_int=5, period=90, unit=\"days\", "
      "task=\"analysis\")\n"
      "S = ANALYZE_SEASONALITY(data=D2, time_int=5)\n"
      "ANS = REFINE_OUTPUT(var=S)\n");
  ExecutionResult partial;
  try {
    interp.execute(program, pool, ctx_for_shared(), &partial);
    FAIL("expected StepError");
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::Step);
    CHECK(e.step_index == 3);
    CHECK(e.module_name == "LOAD_SPATIOTEMPORAL_DATA");
  }
  CHECK(partial.environment.rationale.size() == 2);
}

TEST_CASE("custom module registration dispatches and shows up in the rationale") {
  Interpreter interp;
  interp.register_module("SMOOTH", [](const ArgView& args, const ExecContext&) {
    const Frame& data = args.frame("data");
    auto window = args.integer("window");
    Frame out = data;
    for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
      double sum = 0;
      int count = 0;
      for (Eigen::Index k = std::max<Eigen::Index>(0, r - window + 1); k <= r; ++k) {
        sum += data.values(k, 0);
        ++count;
      }
      out.values(r, 0) = sum / count;
    }
    return Value{out};
  });
  CHECK(interp.module_count() == 13);

  auto pool = default_pool();
  pool.add({"SMOOTH",
            "Moving average over the target column.",
            {{"data", ParamKind::Frame, true, ""}, {"window", ParamKind::Integer, true, ""}},
            "Smoothed frame."});
  auto program = parse_program(
      "D = LOAD_SPATIOTEMPORAL_DATA(location=\"402117\", time=\"2017-01-10 01:00:00\", "
      "feature=\"traffic speed\", region=\"BAY\", time_int=5, period=1, unit=\"hours\", "
      "task=\"analysis\")\n"
      "S = SMOOTH(data=D, window=3)\n"
      "T = ANALYZE_TREND(data=S, feature=\"traffic speed\", location=\"402117\", time_int=5)\n"
      "ANS = REFINE_OUTPUT(var=T)\n");
  REQUIRE(validate_against_pool(program, pool).empty());
  auto result = interp.execute(program, pool, ctx_for_shared());
  CHECK(result.environment.rationale[1].module_name == "SMOOTH");

  // Spot-check the moving average against a direct computation.
  const Frame& d = std::get<Frame>(result.environment.bindings.at("D"));
  const Frame& s = std::get<Frame>(result.environment.bindings.at("S"));
  CHECK(s.values(0, 0) == doctest::Approx(d.values(0, 0)));
  CHECK(s.values(2, 0) ==
        doctest::Approx((d.values(0, 0) + d.values(1, 0) + d.values(2, 0)) / 3.0));
}

TEST_CASE("duplicate registration throws unless replace is requested") {
  Interpreter interp;
  auto noop = [](const ArgView&, const ExecContext&) { return Value{NoneValue{}}; };
  CHECK_THROWS_AS(interp.register_module("FORECAST", noop), Error);
  interp.register_module("FORECAST", noop, /*replace=*/true);
  CHECK(interp.module_count() == 12);
}

TEST_CASE("literal coercion: integers widen to real, text parses to timestamps") {
  Interpreter interp;
  auto pool = default_pool();
  // constraint_val is a real parameter fed the integer 100; time is quoted text.
  auto program = parse_program(golden_forecast_program());
  auto result = interp.execute(program, pool, ctx_for_shared());
  CHECK(std::get<double>(
            std::get<Explanation>(result.environment.bindings.at("EXPL")).components.at(
                "constraint threshold")) == 100.0);
}

TEST_CASE("type mismatch surfaces as a StepError wrapping TypeMismatch") {
  Interpreter interp;
  auto pool = default_pool();
  // FORECAST's data argument receives a trend report.
  auto program = parse_program(
      "D = LOAD_SPATIOTEMPORAL_DATA(location=\"402117\", time=\"2017-01-10 01:00:00\", "
      "feature=\"traffic speed\", region=\"BAY\", time_int=5, period=1, unit=\"hours\", "
      "task=\"analysis\")\n"
      "T = ANALYZE_TREND(data=D, feature=\"traffic speed\", location=\"402117\", time_int=5)\n"
      "P = FORECAST(data=T, location=\"402117\", time=\"2017-01-10 01:00:00\", "
      "feature=\"traffic speed\", region=\"BAY\", time_int=5, period=1, unit=\"hours\", "
      "horizon=35, horizon_unit=\"minutes\")\n");
  try {
    interp.execute(program, pool, ctx_for_shared());
    FAIL("expected StepError");
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::Step);
    CHECK(e.step_index == 3);
    CHECK(std::string(e.what()).find("TypeMismatch") != std::string::npos);
  }
}

TEST_CASE("determinism: executing the same program twice matches exactly") {
  Interpreter interp;
  auto pool = default_pool();
  auto program = parse_program(golden_analysis_program());
  auto a = interp.execute(program, pool, ctx_for_shared());
  auto b = interp.execute(program, pool, ctx_for_shared());
  CHECK(a.answer == b.answer);
  CHECK(a.rationale == b.rationale);
}

TEST_CASE("environment isolation: concurrent executions do not interact") {
  Interpreter interp;
  auto pool = default_pool();
  auto forecast_prog = parse_program(golden_forecast_program());
  auto anomaly_prog = parse_program(golden_anomaly_program());
  ExecContext ctx = ctx_for_shared();

  std::string answer_f_serial = interp.execute(forecast_prog, pool, ctx).answer;
  std::string answer_a_serial = interp.execute(anomaly_prog, pool, ctx).answer;

  std::vector<std::string> f_results(4), a_results(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      f_results[i] = interp.execute(forecast_prog, pool, ctx).answer;
      a_results[i] = interp.execute(anomaly_prog, pool, ctx).answer;
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < 4; ++i) {
    CHECK(f_results[i] == answer_f_serial);
    CHECK(a_results[i] == answer_a_serial);
  }
}

TEST_CASE("rationale entries mirror program order for the anomaly golden") {
  Interpreter interp;
  auto pool = default_pool();
  auto program = parse_program(golden_anomaly_program());
  auto result = interp.execute(program, pool, ctx_for_shared());
  REQUIRE(result.environment.rationale.size() == program.commands.size());
  for (std::size_t i = 0; i < program.commands.size(); ++i) {
    CHECK(result.environment.rationale[i].module_name == program.commands[i].module_name);
    CHECK(result.environment.rationale[i].step_index == int(i) + 1);
  }
}
