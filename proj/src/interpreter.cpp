#include "streason/interpreter.hpp"

#include <chrono>

#include "streason/errors.hpp"
#include "streason/util.hpp"

namespace streason {

ArgView::ArgView(const Command& cmd, const std::map<std::string, Value>& bindings)
    : cmd_(cmd), bindings_(bindings) {}

const ArgValue* ArgView::find(const std::string& name) const {
  return cmd_.find_arg(name);
}

const Value* ArgView::bound(const std::string& name) const {
  const ArgValue* av = find(name);
  if (!av) return nullptr;
  const auto* ref = std::get_if<VarRef>(av);
  if (!ref) return nullptr;
  auto it = bindings_.find(ref->name);
  if (it == bindings_.end())
    throw Error(ErrKind::Reference, "variable " + ref->name + " is unbound");
  return &it->second;
}

void ArgView::mismatch(const std::string& name, const char* wanted) const {
  std::string got = "absent";
  if (const ArgValue* av = find(name)) {
    if (std::holds_alternative<VarRef>(*av)) {
      if (const Value* v = bound(name)) got = value_kind_name(*v);
    } else {
      got = "literal " + render_arg_value(*av);
    }
  }
  throw Error(ErrKind::TypeMismatch,
              "argument '" + name + "' of " + cmd_.module_name + " wants " + wanted + ", got " +
                  got);
}

bool ArgView::has(const std::string& name) const {
  const ArgValue* av = find(name);
  if (!av) return false;
  if (const auto* lit = std::get_if<Literal>(av))
    if (lit->kind == Literal::Kind::None) return false;
  if (const auto* ref = std::get_if<VarRef>(av)) {
    auto it = bindings_.find(ref->name);
    if (it != bindings_.end() && std::holds_alternative<NoneValue>(it->second)) return false;
  }
  return true;
}

std::optional<std::string> ArgView::text_opt(const std::string& name) const {
  if (!has(name)) return std::nullopt;
  const ArgValue* av = find(name);
  if (const auto* lit = std::get_if<Literal>(av)) {
    if (lit->kind == Literal::Kind::Text) return lit->text;
    mismatch(name, "text");
  }
  const Value* v = bound(name);
  if (const auto* t = std::get_if<TextValue>(v)) return t->text;
  mismatch(name, "text");
}

std::string ArgView::text(const std::string& name) const {
  auto v = text_opt(name);
  if (!v) mismatch(name, "text");
  return *v;
}

std::optional<std::int64_t> ArgView::integer_opt(const std::string& name) const {
  if (!has(name)) return std::nullopt;
  const ArgValue* av = find(name);
  if (const auto* lit = std::get_if<Literal>(av)) {
    if (lit->kind == Literal::Kind::Integer) return lit->integer;
    mismatch(name, "integer");
  }
  mismatch(name, "integer");
}

std::int64_t ArgView::integer(const std::string& name) const {
  auto v = integer_opt(name);
  if (!v) mismatch(name, "integer");
  return *v;
}

std::optional<double> ArgView::real_opt(const std::string& name) const {
  if (!has(name)) return std::nullopt;
  const ArgValue* av = find(name);
  if (const auto* lit = std::get_if<Literal>(av)) {
    if (lit->kind == Literal::Kind::Real) return lit->real;
    if (lit->kind == Literal::Kind::Integer)  // integers widen to real
      return static_cast<double>(lit->integer);
    mismatch(name, "real");
  }
  const Value* v = bound(name);
  if (const double* d = std::get_if<double>(v)) return *d;
  mismatch(name, "real");
}

double ArgView::real(const std::string& name) const {
  auto v = real_opt(name);
  if (!v) mismatch(name, "real");
  return *v;
}

Timestamp ArgView::timestamp(const std::string& name) const {
  const ArgValue* av = find(name);
  if (!av || !has(name)) mismatch(name, "timestamp");
  if (const auto* lit = std::get_if<Literal>(av)) {
    if (lit->kind == Literal::Kind::Timestamp) return lit->ts;
    if (lit->kind == Literal::Kind::Text) {  // second chance for plain strings
      if (auto ts = parse_timestamp(lit->text)) return *ts;
    }
  }
  mismatch(name, "timestamp");
}

const Frame* ArgView::frame_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "frame");
  if (const auto* f = std::get_if<Frame>(v)) return f;
  mismatch(name, "frame");
}

const Frame& ArgView::frame(const std::string& name) const {
  const Frame* f = frame_opt(name);
  if (!f) mismatch(name, "frame");
  return *f;
}

const PredictionSeries* ArgView::series_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "prediction series");
  if (const auto* p = std::get_if<PredictionSeries>(v)) return p;
  mismatch(name, "prediction series");
}

const PredictionSeries& ArgView::series(const std::string& name) const {
  const PredictionSeries* p = series_opt(name);
  if (!p) mismatch(name, "prediction series");
  return *p;
}

const TemporalAux* ArgView::temporal_aux_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "temporal aux");
  if (const auto* a = std::get_if<TemporalAux>(v)) return a;
  mismatch(name, "temporal aux");
}

const TrendReport* ArgView::trend_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "trend report");
  if (const auto* r = std::get_if<TrendReport>(v)) return r;
  mismatch(name, "trend report");
}

const SeasonalityReport* ArgView::seasonality_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "seasonality report");
  if (const auto* r = std::get_if<SeasonalityReport>(v)) return r;
  mismatch(name, "seasonality report");
}

const NeighbourhoodReport* ArgView::neighbourhood_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "neighbourhood report");
  if (const auto* r = std::get_if<NeighbourhoodReport>(v)) return r;
  mismatch(name, "neighbourhood report");
}

const SensitivityReport* ArgView::sensitivity_opt(const std::string& name) const {
  if (!has(name)) return nullptr;
  const Value* v = bound(name);
  if (!v) mismatch(name, "sensitivity report");
  if (const auto* r = std::get_if<SensitivityReport>(v)) return r;
  mismatch(name, "sensitivity report");
}

Value ArgView::raw(const std::string& name) const {
  const ArgValue* av = find(name);
  if (!av) mismatch(name, "a value");
  if (const auto* lit = std::get_if<Literal>(av)) {
    switch (lit->kind) {
      case Literal::Kind::Text: return TextValue{lit->text};
      case Literal::Kind::Integer: return static_cast<double>(lit->integer);
      case Literal::Kind::Real: return lit->real;
      case Literal::Kind::Timestamp: return TextValue{format_timestamp(lit->ts)};
      case Literal::Kind::None: return NoneValue{};
    }
  }
  const Value* v = bound(name);
  if (!v) mismatch(name, "a bound variable");
  return *v;
}

namespace {

LoadRequest load_request_from(const ArgView& args) {
  LoadRequest req;
  req.location = args.text("location");
  req.time = args.timestamp("time");
  req.feature = args.text("feature");
  req.region = args.text("region");
  req.time_int = static_cast<int>(args.integer("time_int"));
  req.period = args.integer("period");
  req.unit = args.text("unit");
  req.task = args.text_opt("task").value_or("");
  return req;
}

Frame calendar_filtered(const Frame& data, const std::string& constraint) {
  auto rows = constraint_row_filter(data, constraint);
  Frame out;
  out.feature = data.feature;
  out.region = data.region;
  out.sensor_ids = data.sensor_ids;
  out.time_int = data.time_int;
  out.times.reserve(rows.size());
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(data.cols()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.times.push_back(data.times[rows[i]]);
    out.values.row(static_cast<Eigen::Index>(i)) = data.values.row(rows[i]);
  }
  return out;
}

ForecastRequest forecast_request_from(const ArgView& args, const ExecContext& ctx) {
  ForecastRequest req;
  req.horizon = static_cast<int>(args.integer("horizon"));
  req.horizon_unit = args.text("horizon_unit");
  req.model = ctx.forecaster;
  return req;
}

}  // namespace

Interpreter::Interpreter() {
  register_module("LOAD_SPATIOTEMPORAL_DATA", [](const ArgView& args, const ExecContext& ctx) {
    auto ds = Dataset::open(ctx.data_root);
    return Value{load_st_data(*ds, load_request_from(args))};
  });

  register_module("LOAD_SPATIAL_AUX_DATA", [](const ArgView& args, const ExecContext& ctx) {
    auto ds = Dataset::open(ctx.data_root);
    return Value{load_spatial_aux(*ds, load_request_from(args), ctx.knn).frame};
  });

  register_module("LOAD_TEMPORAL_AUX_DATA", [](const ArgView& args, const ExecContext& ctx) {
    auto ds = Dataset::open(ctx.data_root);
    return Value{load_temporal_aux(*ds, args.text("temp_var"), load_request_from(args))};
  });

  register_module("IMPOSE_CONSTRAINTS", [](const ArgView& args, const ExecContext&) {
    std::optional<Frame> data;
    if (const Frame* f = args.frame_opt("data")) data = *f;
    std::optional<PredictionSeries> preds;
    if (const PredictionSeries* p = args.series_opt("preds")) preds = *p;
    auto result = impose_constraints(data, preds, args.text_opt("constraint").value_or(""),
                                     args.real_opt("constraint_val"));
    if (result.preds) return Value{std::move(*result.preds)};
    return Value{std::move(*result.frame)};
  });

  register_module("ANALYZE_TREND", [](const ArgView& args, const ExecContext&) {
    return Value{analyze_trend(args.frame("data"), args.text_opt("constraint").value_or(""))};
  });

  register_module("ANALYZE_SEASONALITY", [](const ArgView& args, const ExecContext&) {
    return Value{
        analyze_seasonality(args.frame("data"), args.text_opt("constraint").value_or(""))};
  });

  register_module("ANALYZE_NEIGHBOURHOOD", [](const ArgView& args, const ExecContext& ctx) {
    auto ds = Dataset::open(ctx.data_root);
    return Value{
        analyze_neighbourhood(*ds, args.text("location"), args.text("feature"), ctx.knn)};
  });

  register_module("GEN_EXPLANATION", [](const ArgView& args, const ExecContext& ctx) {
    ExplanationInputs in;
    in.task = args.text("task");
    in.feature = args.text("feature");
    in.location = args.text("location");
    in.region = args.text("region");
    in.time_int = static_cast<int>(args.integer("time_int"));
    in.horizon = args.integer_opt("horizon");
    in.horizon_unit = args.text_opt("horizon_unit").value_or("");
    in.constraint = args.text_opt("constraint").value_or("");
    in.constraint_val = args.real_opt("constraint_val");
    in.data = args.frame_opt("data");
    in.trend = args.trend_opt("trend");
    in.seasonality = args.seasonality_opt("seasonality");
    in.neighbourhood = args.neighbourhood_opt("neighbourhood");
    in.preds = args.series_opt("preds");
    in.sensitivity = args.sensitivity_opt("sensitivity");
    Explanation expl = gen_explanation(in);
    if (ctx.polish_backend) polish_explanation(expl, *ctx.polish_backend);
    return Value{std::move(expl)};
  });

  register_module("DETECT_ANOMALY_ST_DATA", [](const ArgView& args, const ExecContext& ctx) {
    AnomalyOptions opts = ctx.anomaly;
    opts.temporal_reasoning = args.integer_opt("temp_reasoning").value_or(0) != 0;
    opts.spatial_reasoning = args.integer_opt("spatial_reasoning").value_or(0) != 0;
    const Frame& data = args.frame("data");
    std::string constraint = args.text_opt("constraint").value_or("");
    const Frame* spatial = args.frame_opt("spatial_aux_data");
    const TemporalAux* temporal = args.temporal_aux_opt("temp_aux_data");
    if (!constraint.empty() && constraint != "none") {
      Frame filtered = calendar_filtered(data, constraint);
      return Value{detect_anomaly(filtered, spatial, temporal, opts)};
    }
    return Value{detect_anomaly(data, spatial, temporal, opts)};
  });

  register_module("FORECAST", [](const ArgView& args, const ExecContext& ctx) {
    return Value{forecast(args.frame("data"), forecast_request_from(args, ctx))};
  });

  register_module("CONDUCT_SENSITIVITY_ANALYSIS", [](const ArgView& args, const ExecContext& ctx) {
    return Value{sensitivity_analysis(args.frame("data"), args.series("preds"),
                                      forecast_request_from(args, ctx), ctx.sensitivity)};
  });

  register_module("REFINE_OUTPUT", [](const ArgView& args, const ExecContext&) {
    return Value{TextValue{refine_output(args.raw("var"))}};
  });
}

void Interpreter::register_module(const std::string& name, ModuleFn fn, bool replace) {
  if (!replace && table_.count(name))
    throw Error(ErrKind::DuplicateModule, "module " + name + " already registered");
  table_[name] = std::move(fn);
}

namespace {

std::string inputs_summary(const Command& cmd) {
  std::string out;
  for (std::size_t i = 0; i < cmd.args.size(); ++i) {
    if (i) out += ", ";
    out += cmd.args[i].name + "=" + render_arg_value(cmd.args[i].value);
  }
  return out.empty() ? "(none)" : out;
}

}  // namespace

ExecutionResult Interpreter::execute(const StProgram& program, const FunctionPool& pool,
                                     const ExecContext& ctx, ExecutionResult* partial) const {
  (void)pool;  // validated upstream; execution dispatches purely on the table
  ExecutionResult result;
  Environment& env = result.environment;

  auto bail = [&](int step, const std::string& module, const Error& cause) -> Error {
    result.rationale = compile_rationale(env.rationale);
    if (partial) *partial = result;
    return step_error(step, module, cause);
  };

  int step = 0;
  for (const auto& cmd : program.commands) {
    ++step;
    auto it = table_.find(cmd.module_name);
    if (it == table_.end())
      throw bail(step, cmd.module_name,
                 Error(ErrKind::Config, "no implementation registered for " + cmd.module_name));
    auto t0 = std::chrono::steady_clock::now();
    Value value;
    try {
      value = it->second(ArgView(cmd, env.bindings), ctx);
    } catch (const Error& e) {
      throw bail(step, cmd.module_name, e);
    } catch (const std::exception& e) {
      throw bail(step, cmd.module_name, Error(ErrKind::Config, e.what()));
    }
    auto t1 = std::chrono::steady_clock::now();
    result.timings.push_back(
        {step, cmd.module_name, std::chrono::duration<double, std::milli>(t1 - t0).count()});
    env.rationale.push_back({step, cmd.module_name, inputs_summary(cmd), value_brief(value)});
    env.bindings[cmd.output_var] = std::move(value);

    if (step == static_cast<int>(program.commands.size())) {
      const Value& final_value = env.bindings[cmd.output_var];
      if (const auto* t = std::get_if<TextValue>(&final_value)) {
        result.answer = t->text;
      } else {
        try {
          result.answer = refine_output(final_value);
        } catch (const Error&) {
          result.answer = value_brief(final_value);  // no renderable final step
        }
      }
    }
  }
  result.rationale = compile_rationale(env.rationale);
  return result;
}

}  // namespace streason
