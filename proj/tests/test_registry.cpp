#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "streason/errors.hpp"
#include "streason/registry.hpp"
#include "streason/stprogram.hpp"

using namespace streason;
using streason::testing::TempDir;

namespace {

// Checked-in transcription of the twelve call signatures.
const std::pair<const char*, std::vector<const char*>> kSignatures[] = {
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
     {"data", "location", "time", "feature", "region", "time_int", "period", "unit", "horizon",
      "horizon_unit"}},
    {"CONDUCT_SENSITIVITY_ANALYSIS",
     {"data", "preds", "location", "time", "feature", "region", "time_int", "period", "unit",
      "horizon", "horizon_unit"}},
    {"REFINE_OUTPUT", {"var"}},
};

}  // namespace

TEST_CASE("default pool holds exactly the twelve signatures, names in order") {
  auto pool = default_pool();
  CHECK(pool.size() == 12);
  for (const auto& [name, params] : kSignatures) {
    const FunctionSpec* spec = pool.find(name);
    REQUIRE_MESSAGE(spec != nullptr, name);
    REQUIRE(spec->params.size() == params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      CHECK_MESSAGE(spec->params[i].name == params[i], name << " param " << i);
  }
  CHECK(pool.find("LOAD_SPATIOTEMPORAL_DATA")->params.size() == 8);
  CHECK(pool.find("REFINE_OUTPUT")->params.size() == 1);
}

TEST_CASE("prompt rendering is deterministic and carries signatures") {
  auto pool = default_pool();
  std::string prompt = render_pool_prompt(pool);
  CHECK(prompt.find("ANALYZE_SEASONALITY(data, time_int, constraint)") != std::string::npos);
  CHECK(prompt.find("LOAD_SPATIOTEMPORAL_DATA(location, time, feature, region, time_int, "
                    "period, unit, task)") != std::string::npos);
  CHECK(render_pool_prompt(pool) == prompt);
  CHECK(render_pool_prompt(FunctionPool{}) == "");
}

TEST_CASE("pool file round trip") {
  TempDir dir("pool");
  auto path = (dir.path() / "pool.json").string();
  auto pool = default_pool();
  save_pool(pool, path);
  CHECK(load_pool(path) == pool);
}

TEST_CASE("duplicate parameter names are a FormatError") {
  TempDir dir("pool_dup");
  auto path = (dir.path() / "pool.json").string();
  std::ofstream(path) << R"({"functions":[{"name":"F","description":"","returns":"",
      "params":[{"name":"a","kind":"text","required":true,"description":""},
                {"name":"a","kind":"text","required":true,"description":""}]}]})";
  CHECK_THROWS_AS(load_pool(path), Error);
  try {
    load_pool(path);
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::Format);
  }
}

TEST_CASE("a thirteenth custom function extends validation") {
  TempDir dir("pool13");
  auto path = (dir.path() / "pool.json").string();
  auto pool = default_pool();
  pool.add({"SMOOTH",
            "Moving average over the target column.",
            {{"data", ParamKind::Frame, true, ""}, {"window", ParamKind::Integer, true, ""}},
            "Smoothed frame."});
  save_pool(pool, path);
  auto loaded = load_pool(path);
  CHECK(loaded.size() == 13);
  auto p = parse_program(
      "D = LOAD_SPATIOTEMPORAL_DATA(location=\"x\", time=\"2017-01-01 00:00:00\", "
      "feature=\"f\", region=\"r\", time_int=5, period=1, unit=\"hours\", task=\"analysis\")\n"
      "S = SMOOTH(data=D, window=3)\n");
  CHECK(validate_against_pool(p, loaded).empty());
}

TEST_CASE("unknown parameter kind is a FormatError") {
  TempDir dir("pool_kind");
  auto path = (dir.path() / "pool.json").string();
  std::ofstream(path) << R"({"functions":[{"name":"F","description":"","returns":"",
      "params":[{"name":"a","kind":"tensor","required":true,"description":""}]}]})";
  CHECK_THROWS_AS(load_pool(path), Error);
}

TEST_CASE("shipped pool file matches the built-in catalog") {
  if (!std::filesystem::exists("config/function_pool.json")) return;  // run from repo root
  CHECK(load_pool("config/function_pool.json") == default_pool());
}
