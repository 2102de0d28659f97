#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "streason/bench.hpp"
#include "streason/errors.hpp"
#include "streason/evalkit.hpp"
#include "streason/generator.hpp"
#include "streason/interpreter.hpp"
#include "streason/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace streason;

namespace {

struct GlobalOpts {
  std::string data_root;
  std::string config_path;
  std::string pool_path;
  std::string examples_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string format = "text";
  bool deterministic = true;
  // Tunables reachable only through the run-config file.
  std::string forecaster = "auto";
  int knn = 4;
  AnomalyOptions anomaly;
  SensitivityOptions sensitivity;
};

std::string resolve_data_root(const GlobalOpts& g) {
  if (!g.data_root.empty()) return g.data_root;
  if (const char* env = std::getenv("STREASON_DATA_ROOT")) return env;
  throw Error(ErrKind::Config, "no dataset root (pass --data-root or set STREASON_DATA_ROOT)");
}

FunctionPool resolve_pool(const GlobalOpts& g) {
  if (!g.pool_path.empty()) return load_pool(g.pool_path);
  if (fs::exists("config/function_pool.json")) return load_pool("config/function_pool.json");
  return default_pool();
}

std::vector<ExamplePair> resolve_examples(const GlobalOpts& g) {
  std::string path = g.examples_path;
  if (path.empty() && fs::exists("config/example_pool.json"))
    path = "config/example_pool.json";
  if (path.empty()) return default_example_pool();
  return load_example_pool(path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "cannot write " + path);
  out << text;
}

std::string load_prompt_override(const std::string& name) {
  for (const std::string& path : {"config/prompts/" + name, "config/prompts/" + name + ".txt"})
    if (fs::exists(path)) return read_file(path);
  return "";
}

TaskTag infer_task(const std::string& query) {
  std::string q = lower(query);
  if (q.find("anomal") != std::string::npos || q.find("unusual") != std::string::npos)
    return TaskTag::Anomaly;
  if (q.find("predict") != std::string::npos || q.find("forecast") != std::string::npos ||
      q.find("will be") != std::string::npos || q.find("next") != std::string::npos)
    return TaskTag::Prediction;
  return TaskTag::Analysis;
}

struct BackendOpts {
  std::string fixtures_path;
  bool wire = false;
};

std::unique_ptr<CompletionBackend> make_backend(const BackendOpts& b) {
  if (!b.fixtures_path.empty())
    return std::make_unique<FixtureBackend>(FixtureBackend::from_file(b.fixtures_path));
  if (b.wire) return std::make_unique<WireBackend>(WireConfig::from_env());
  return nullptr;
}

void apply_run_config(GlobalOpts& g) {
  if (g.config_path.empty()) return;
  json doc;
  std::ifstream in(g.config_path);
  if (!in) throw Error(ErrKind::Io, "cannot open config " + g.config_path);
  try {
    in >> doc;
    if (g.data_root.empty()) g.data_root = doc.value("data_root", "");
    if (g.pool_path.empty()) g.pool_path = doc.value("function_pool", "");
    if (g.examples_path.empty()) g.examples_path = doc.value("example_pool", "");
    g.jobs = doc.value("jobs", g.jobs);
    g.deterministic = doc.value("deterministic", g.deterministic);
    g.forecaster = doc.value("forecaster", g.forecaster);
    g.knn = doc.value("knn", g.knn);
    g.anomaly.z_threshold = doc.value("z_threshold", g.anomaly.z_threshold);
    g.anomaly.neighbour_z_threshold =
        doc.value("neighbour_z_threshold", g.anomaly.neighbour_z_threshold);
    g.anomaly.regional_fraction = doc.value("regional_fraction", g.anomaly.regional_fraction);
    g.sensitivity.perturbation = doc.value("perturbation", g.sensitivity.perturbation);
  } catch (const json::exception& e) {
    throw Error(ErrKind::Config, std::string("run config: ") + e.what());
  }
}

ExecContext make_context(const GlobalOpts& g) {
  ExecContext ctx;
  ctx.data_root = resolve_data_root(g);
  ctx.deterministic = g.deterministic;
  ctx.forecaster = g.forecaster;
  ctx.knn = g.knn;
  ctx.anomaly = g.anomaly;
  ctx.sensitivity = g.sensitivity;
  return ctx;
}

void print_generation_issues(const GenerationRecord& record) {
  for (const auto& issue : record.issues)
    std::cerr << "warning: " << describe(issue) << "\n";
}

int run_execution(const StProgram& program, const FunctionPool& pool, const ExecContext& ctx,
                  const std::string& out_path, const std::string& rationale_path) {
  Interpreter interp;
  auto issues = validate_against_pool(program, pool);
  if (!issues.empty()) {
    for (const auto& issue : issues) std::cerr << "error: " << describe(issue) << "\n";
    return 5;
  }
  ExecutionResult partial;
  ExecutionResult result;
  try {
    result = interp.execute(program, pool, ctx, &partial);
  } catch (const Error& e) {
    if (!rationale_path.empty()) write_file(rationale_path, partial.rationale + "\n");
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind);
  }
  if (out_path.empty())
    std::cout << result.answer << "\n";
  else
    write_file(out_path, result.answer + "\n");
  if (!rationale_path.empty()) write_file(rationale_path, result.rationale + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STReason: ST-Program generation, interpretation and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--data-root", g.data_root, "Dataset directory (or STREASON_DATA_ROOT)");
  app.add_option("--config", g.config_path, "Run-config JSON file");
  app.add_option("--pool", g.pool_path, "Function pool JSON (default config/function_pool.json)");
  app.add_option("--examples", g.examples_path,
                 "Example pool JSON (default config/example_pool.json)");
  app.add_option("--seed", g.seed, "Seed for example selection / synthesis");
  app.add_option("--jobs", g.jobs, "Parallel instances for bench");
  app.add_option("--format", g.format, "Output format: text or machine")
      ->check(CLI::IsMember({"text", "machine"}));
  app.add_flag("--deterministic,!--no-deterministic", g.deterministic,
               "Deterministic narration (default on)");

  // run
  auto* run = app.add_subcommand("run", "Answer a query end-to-end");
  std::string run_query, run_program, run_out, run_rationale;
  BackendOpts run_backend;
  bool run_polish = false;
  PromptConfig run_prompt;
  std::string run_variant = "equal", run_task;
  run->add_option("query", run_query, "Natural-language query")->required();
  run->add_option("--program", run_program, "Skip generation; execute this .stp file");
  run->add_option("--fixtures", run_backend.fixtures_path, "Fixture completions file");
  run->add_flag("--wire", run_backend.wire, "Use the wire backend (STREASON_API_* env)");
  run->add_option("--out", run_out, "Write the answer here instead of stdout");
  run->add_option("--rationale", run_rationale, "Write the execution rationale here");
  run->add_flag("--polish", run_polish, "LLM-polish the explanation prose");
  run->add_option("--n-examples", run_prompt.n_examples, "In-context examples in the prompt");
  run->add_option("--variant", run_variant, "equal|random|include|exclude");
  run->add_option("--include-fraction", run_prompt.include_fraction,
                  "Same-task share for the include variant");
  run->add_flag("--function-pool,!--no-function-pool", run_prompt.use_function_pool,
                "Embed the function pool in the prompt");
  run->add_option("--task", run_task, "Query task tag (default inferred)");

  // exec
  auto* exec = app.add_subcommand("exec", "Execute an ST-Program file");
  std::string exec_file, exec_out, exec_rationale;
  exec->add_option("file", exec_file, "Program file (.stp)")->required();
  exec->add_option("--out", exec_out, "Write the answer here instead of stdout");
  exec->add_option("--rationale", exec_rationale, "Write the execution rationale here");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an ST-Program from a query");
  std::string gen_query, gen_variant = "equal", gen_task;
  BackendOpts gen_backend;
  PromptConfig gen_prompt;
  bool gen_dump_prompt = false;
  gen->add_option("query", gen_query, "Natural-language query")->required();
  gen->add_option("--fixtures", gen_backend.fixtures_path, "Fixture completions file");
  gen->add_flag("--wire", gen_backend.wire, "Use the wire backend");
  gen->add_flag("--dump-prompt", gen_dump_prompt, "Print the prompt and stop");
  gen->add_option("--n-examples", gen_prompt.n_examples, "In-context examples in the prompt");
  gen->add_option("--variant", gen_variant, "equal|random|include|exclude");
  gen->add_option("--include-fraction", gen_prompt.include_fraction,
                  "Same-task share for the include variant");
  gen->add_flag("--function-pool,!--no-function-pool", gen_prompt.use_function_pool,
                "Embed the function pool in the prompt");
  gen->add_option("--task", gen_task, "Query task tag (default inferred)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark instance suite");
  std::string bench_instances, bench_report = "bench_report.json", bench_summary;
  std::string bench_judge_fixtures, bench_variant = "equal";
  BackendOpts bench_backend;
  PromptConfig bench_prompt;
  bool bench_use_gen = false, bench_judge_wire = false;
  bench->add_option("instances", bench_instances, "Instances JSON file")->required();
  bench->add_flag("--use-gen", bench_use_gen, "Generate programs instead of executing gold");
  bench->add_option("--fixtures", bench_backend.fixtures_path, "Fixture completions file");
  bench->add_flag("--wire", bench_backend.wire, "Use the wire backend for generation");
  bench->add_flag("--judge", bench_judge_wire, "Judge-based scoring over the wire backend");
  bench->add_option("--judge-fixtures", bench_judge_fixtures, "Fixture file for judge replies");
  bench->add_option("--report", bench_report, "Report JSON path");
  bench->add_option("--summary", bench_summary, "Summary table path");
  bench->add_option("--n-examples", bench_prompt.n_examples, "In-context examples per prompt");
  bench->add_option("--variant", bench_variant, "equal|random|include|exclude");
  bench->add_flag("--function-pool,!--no-function-pool", bench_prompt.use_function_pool,
                  "Embed the function pool in prompts");

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a dataset");
  std::string synth_out, synth_config;
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--synth-config", synth_config, "Synthesis config JSON");

  // eval-program
  auto* evalp = app.add_subcommand("eval-program", "Match a candidate program against gold");
  std::string evalp_candidate, evalp_gold;
  evalp->add_option("candidate", evalp_candidate, "Candidate .stp file")->required();
  evalp->add_option("gold", evalp_gold, "Gold .stp file")->required();

  // make-bench
  auto* makebench = app.add_subcommand("make-bench", "Build the default 30-instance suite");
  std::string mb_out = "bench_instances.json", mb_fixtures;
  makebench->add_option("--out", mb_out, "Instances JSON path");
  makebench->add_option("--fixtures-out", mb_fixtures, "Also write gold-replay fixtures here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_run_config(g);

    if (*synth) {
      SynthConfig cfg = synth_config.empty() ? default_synth_config()
                                             : load_synth_config(synth_config);
      std::uint64_t seed = g.seed == 0 ? 42 : g.seed;
      synth_dataset(seed, cfg, synth_out);
      std::cout << "dataset written to " << synth_out << " (seed " << seed << ")\n";
      return 0;
    }

    if (*evalp) {
      StProgram candidate = parse_program(read_file(evalp_candidate));
      StProgram gold = parse_program(read_file(evalp_gold));
      ProgramMatch match = match_programs(candidate, gold);
      if (g.format == "machine") {
        json doc = {{"tp", match.tp},       {"fp", match.fp},
                    {"fn", match.fn_},      {"precision", match.precision},
                    {"recall", match.recall}, {"f1", match.f1}};
        std::cout << doc.dump(2) << "\n";
      } else {
        std::cout << "tp=" << match.tp << " fp=" << match.fp << " fn=" << match.fn_
                  << " precision=" << format_number(match.precision)
                  << " recall=" << format_number(match.recall)
                  << " f1=" << format_number(match.f1) << "\n";
      }
      return 0;
    }

    if (*gen) {
      FunctionPool pool = resolve_pool(g);
      auto examples = resolve_examples(g);
      auto variant = selection_variant_from_name(gen_variant);
      if (!variant) throw Error(ErrKind::Config, "unknown variant '" + gen_variant + "'");
      gen_prompt.variant = *variant;
      gen_prompt.seed = g.seed;
      TaskTag task = gen_task.empty() ? infer_task(gen_query)
                                      : task_tag_from_name(gen_task).value_or(infer_task(gen_query));
      if (gen_dump_prompt) {
        auto selected = select_examples(examples, task, gen_prompt);
        std::cout << build_prompt(gen_query, selected, pool, gen_prompt);
        return 0;
      }
      auto backend = make_backend(gen_backend);
      if (!backend) throw Error(ErrKind::Backend, "gen needs --fixtures or --wire");
      GenerationRecord record =
          generate_program(gen_query, task, examples, pool, gen_prompt, *backend);
      print_generation_issues(record);
      if (!record.program) {
        std::cerr << "error: " << record.parse_error << "\n";
        return 5;
      }
      if (g.format == "machine") {
        json issues = json::array();
        for (const auto& i : record.issues) issues.push_back(describe(i));
        json doc = {{"query", record.query},
                    {"backend", record.backend_name},
                    {"program", render_program(*record.program)},
                    {"issues", issues}};
        std::cout << doc.dump(2) << "\n";
      } else {
        std::cout << render_program(*record.program);
      }
      return 0;
    }

    if (*run) {
      FunctionPool pool = resolve_pool(g);
      ExecContext ctx = make_context(g);
      std::unique_ptr<CompletionBackend> polish;
      if (run_polish) {
        polish = make_backend(run_backend);
        if (!polish) throw Error(ErrKind::Backend, "--polish needs --fixtures or --wire");
        ctx.polish_backend = polish.get();
      }
      StProgram program;
      if (!run_program.empty()) {
        program = parse_program(read_file(run_program));
      } else {
        auto backend = make_backend(run_backend);
        if (!backend) throw Error(ErrKind::Backend, "run needs --program, --fixtures or --wire");
        auto variant = selection_variant_from_name(run_variant);
        if (!variant) throw Error(ErrKind::Config, "unknown variant '" + run_variant + "'");
        run_prompt.variant = *variant;
        run_prompt.seed = g.seed;
        TaskTag task = run_task.empty()
                           ? infer_task(run_query)
                           : task_tag_from_name(run_task).value_or(infer_task(run_query));
        GenerationRecord record =
            generate_program(run_query, task, resolve_examples(g), pool, run_prompt, *backend);
        print_generation_issues(record);
        if (!record.program) {
          std::cerr << "error: " << record.parse_error << "\n";
          return 5;
        }
        program = *record.program;
      }
      return run_execution(program, pool, ctx, run_out, run_rationale);
    }

    if (*exec) {
      FunctionPool pool = resolve_pool(g);
      return run_execution(parse_program(read_file(exec_file)), pool, make_context(g), exec_out,
                           exec_rationale);
    }

    if (*makebench) {
      FunctionPool pool = resolve_pool(g);
      Interpreter interp;
      auto instances = make_default_bench(resolve_data_root(g), pool, interp);
      save_instances(instances, mb_out);
      if (!mb_fixtures.empty()) save_bench_fixtures(instances, mb_fixtures);
      std::cout << instances.size() << " instances written to " << mb_out << "\n";
      return 0;
    }

    if (*bench) {
      FunctionPool pool = resolve_pool(g);
      auto instances = load_instances(bench_instances);
      Interpreter interp;
      BenchOptions opts;
      opts.ctx = make_context(g);
      opts.jobs = g.jobs;
      auto variant = selection_variant_from_name(bench_variant);
      if (!variant) throw Error(ErrKind::Config, "unknown variant '" + bench_variant + "'");
      bench_prompt.variant = *variant;
      bench_prompt.seed = g.seed;
      opts.prompt = bench_prompt;

      std::unique_ptr<CompletionBackend> generator_backend;
      std::vector<ExamplePair> examples;
      if (bench_use_gen) {
        generator_backend = make_backend(bench_backend);
        if (!generator_backend)
          throw Error(ErrKind::Backend, "--use-gen needs --fixtures or --wire");
        opts.generator_backend = generator_backend.get();
        examples = resolve_examples(g);
      }
      std::unique_ptr<CompletionBackend> judge;
      if (!bench_judge_fixtures.empty())
        judge = std::make_unique<FixtureBackend>(FixtureBackend::from_file(bench_judge_fixtures));
      else if (bench_judge_wire)
        judge = std::make_unique<WireBackend>(WireConfig::from_env());
      opts.judge = judge.get();
      opts.constraint_prompt = load_prompt_override("constraint");
      opts.factuality_prompt = load_prompt_override("factuality");
      opts.coherence_prompt = load_prompt_override("coherence");

      BenchReport report = run_bench(instances, pool, examples, interp, opts);
      save_report(report, bench_report);
      std::string table = report.summary_table();
      if (!bench_summary.empty()) write_file(bench_summary, table);
      std::cout << table;
      std::cerr << "report written to " << bench_report << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 2;
}
