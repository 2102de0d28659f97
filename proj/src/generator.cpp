#include "streason/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "streason/errors.hpp"
#include "streason/util.hpp"

using nlohmann::json;

namespace streason {

const char* task_tag_name(TaskTag t) {
  switch (t) {
    case TaskTag::Analysis: return "analysis";
    case TaskTag::Anomaly: return "anomaly";
    case TaskTag::Prediction: return "prediction";
  }
  return "analysis";
}

std::optional<TaskTag> task_tag_from_name(std::string_view s) {
  if (s == "analysis") return TaskTag::Analysis;
  if (s == "anomaly") return TaskTag::Anomaly;
  if (s == "prediction") return TaskTag::Prediction;
  return std::nullopt;
}

const char* selection_variant_name(SelectionVariant v) {
  switch (v) {
    case SelectionVariant::Equal: return "equal";
    case SelectionVariant::Random: return "random";
    case SelectionVariant::Include: return "include";
    case SelectionVariant::Exclude: return "exclude";
  }
  return "equal";
}

std::optional<SelectionVariant> selection_variant_from_name(std::string_view s) {
  if (s == "equal") return SelectionVariant::Equal;
  if (s == "random") return SelectionVariant::Random;
  if (s == "include") return SelectionVariant::Include;
  if (s == "exclude") return SelectionVariant::Exclude;
  return std::nullopt;
}

std::vector<ExamplePair> load_example_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrKind::Io, "cannot open example pool " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, std::string("example pool: ") + e.what());
  }
  std::vector<ExamplePair> pool;
  try {
    for (const auto& e : doc.at("examples")) {
      ExamplePair pair;
      pair.query = e.at("query").get<std::string>();
      pair.program_text = e.at("program").get<std::string>();
      auto tag = task_tag_from_name(e.at("task_tag").get<std::string>());
      if (!tag)
        throw Error(ErrKind::Format,
                    "unknown task_tag '" + e.at("task_tag").get<std::string>() + "'");
      pair.task_tag = *tag;
      pool.push_back(std::move(pair));
    }
  } catch (const json::exception& e) {
    throw Error(ErrKind::Format, std::string("example pool: ") + e.what());
  }
  return pool;
}

void save_example_pool(const std::vector<ExamplePair>& pool, const std::string& path) {
  json examples = json::array();
  for (const auto& p : pool)
    examples.push_back({{"query", p.query},
                        {"program", p.program_text},
                        {"task_tag", task_tag_name(p.task_tag)}});
  std::ofstream out(path);
  if (!out) throw Error(ErrKind::Io, "cannot write example pool " + path);
  out << json{{"examples", examples}}.dump(2) << "\n";
}

namespace {

std::vector<std::size_t> indices_with_tag(const std::vector<ExamplePair>& pool, TaskTag tag,
                                          bool invert = false) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if ((pool[i].task_tag == tag) != invert) out.push_back(i);
  return out;
}

// Deterministic draw of `count` items without replacement.
std::vector<std::size_t> draw(std::vector<std::size_t> candidates, std::size_t count, Rng& rng) {
  if (count > candidates.size())
    throw Error(ErrKind::PoolExhausted,
                "requested " + std::to_string(count) + " examples, only " +
                    std::to_string(candidates.size()) + " available under this variant");
  rng.shuffle(candidates);
  candidates.resize(count);
  return candidates;
}

}  // namespace

std::vector<ExamplePair> select_examples(const std::vector<ExamplePair>& pool, TaskTag query_task,
                                         const PromptConfig& cfg) {
  if (pool.empty()) throw Error(ErrKind::PoolExhausted, "example pool is empty");
  if (cfg.n_examples < 0) throw Error(ErrKind::Config, "n_examples must be >= 0");
  const auto n = static_cast<std::size_t>(cfg.n_examples);
  Rng rng(cfg.seed);

  std::vector<std::size_t> picked;
  switch (cfg.variant) {
    case SelectionVariant::Equal: {
      const TaskTag tags[] = {TaskTag::Analysis, TaskTag::Anomaly, TaskTag::Prediction};
      std::size_t base = n / 3, leftover = n % 3;
      // Leftovers go round-robin starting at the query's tag so per-tag counts
      // stay within one of each other.
      std::size_t query_pos = 0;
      for (std::size_t i = 0; i < 3; ++i)
        if (tags[i] == query_task) query_pos = i;
      for (std::size_t i = 0; i < 3; ++i) {
        std::size_t want = base + ((i + 3 - query_pos) % 3 < leftover ? 1 : 0);
        auto ids = draw(indices_with_tag(pool, tags[i]), want, rng);
        picked.insert(picked.end(), ids.begin(), ids.end());
      }
      break;
    }
    case SelectionVariant::Random: {
      std::vector<std::size_t> all(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) all[i] = i;
      picked = draw(std::move(all), n, rng);
      break;
    }
    case SelectionVariant::Include: {
      if (cfg.include_fraction <= 0.0 || cfg.include_fraction > 1.0)
        throw Error(ErrKind::Config, "include_fraction must be in (0, 1]");
      std::size_t same = static_cast<std::size_t>(
          std::ceil(cfg.include_fraction * static_cast<double>(n)));
      same = std::min(same, n);
      auto ids = draw(indices_with_tag(pool, query_task), same, rng);
      picked.insert(picked.end(), ids.begin(), ids.end());
      auto rest = draw(indices_with_tag(pool, query_task, /*invert=*/true), n - same, rng);
      picked.insert(picked.end(), rest.begin(), rest.end());
      break;
    }
    case SelectionVariant::Exclude: {
      picked = draw(indices_with_tag(pool, query_task, /*invert=*/true), n, rng);
      break;
    }
  }

  std::vector<ExamplePair> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(pool[i]);
  return out;
}

std::string build_prompt(const std::string& query, const std::vector<ExamplePair>& examples,
                         const FunctionPool& pool, const PromptConfig& cfg) {
  std::string prompt =
      "You translate spatio-temporal questions into straight-line programs. Each program line "
      "has the shape OUT = MODULE(name=value, ...). Use only the modules listed below, one "
      "command per line, and finish with a REFINE_OUTPUT step. Reply with the program only.\n\n";
  if (cfg.use_function_pool) {
    prompt += "Available modules:\n\n";
    prompt += render_pool_prompt(pool);
  }
  for (const auto& ex : examples) {
    prompt += "Query: " + ex.query + "\nProgram:\n" + ex.program_text;
    if (!ex.program_text.empty() && ex.program_text.back() != '\n') prompt += '\n';
    prompt += '\n';
  }
  prompt += "Query: " + query + "\nProgram:\n";
  return prompt;
}

std::string extract_program_block(const std::string& completion) {
  auto looks_like_command = [](const std::string& line) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') return false;
    try {
      parse_program(t);  // single-line probe
      return true;
    } catch (const Error& e) {
      return e.kind == ErrKind::Reference;  // dangling ref still shapes like a command
    }
  };

  auto lines = split_lines(completion);

  // Prefer the first fenced block that holds at least one command-shaped line.
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).rfind("```", 0) != 0) continue;
    std::string block;
    bool any = false;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (trim(lines[j]).rfind("```", 0) == 0) break;
      if (looks_like_command(lines[j])) any = true;
      block += lines[j];
      block += '\n';
    }
    if (any) return block;
  }

  // Otherwise the first maximal run of command lines; comments and blanks may
  // sit inside the run, but not before it.
  std::string block;
  bool in_run = false;
  for (const auto& line : lines) {
    std::string t = trim(line);
    if (looks_like_command(line)) {
      in_run = true;
      block += line;
      block += '\n';
    } else if (in_run && (t.empty() || t[0] == '#')) {
      block += line;
      block += '\n';
    } else if (in_run) {
      break;
    }
  }
  return block;
}

GenerationRecord generate_program(const std::string& query, TaskTag query_task,
                                  const std::vector<ExamplePair>& example_pool,
                                  const FunctionPool& pool, const PromptConfig& cfg,
                                  CompletionBackend& backend) {
  GenerationRecord record;
  record.query = query;
  record.backend_name = backend.name();

  auto examples = select_examples(example_pool, query_task, cfg);
  record.prompt = build_prompt(query, examples, pool, cfg);
  record.raw_completion = complete_with_retry(backend, record.prompt);

  std::string block = extract_program_block(record.raw_completion);
  if (trim(block).empty())
    throw Error(ErrKind::EmptyCompletion, "completion carries no program block");

  try {
    record.program = parse_program(block);
  } catch (const Error& e) {
    record.parse_error = e.what();
    return record;
  }
  record.issues = validate_against_pool(*record.program, pool);
  return record;
}

}  // namespace streason
