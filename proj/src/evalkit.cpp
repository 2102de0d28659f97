#include "streason/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "streason/errors.hpp"
#include "streason/util.hpp"

namespace streason {

namespace {

constexpr double kRealTolerance = 1e-9;

// One command plus the provenance of its variable references: each VarRef
// carries the module name of its defining command, so renamed variables still
// compare equal. Refs with no defining command keep only their spelling.
struct StepKey {
  const Command* cmd;
  std::vector<std::string> ref_modules;  // parallel to cmd->args; empty when
                                         // literal or dangling
};

std::vector<StepKey> build_keys(const StProgram& program) {
  std::vector<StepKey> keys;
  std::map<std::string, std::string> defined_by;  // var -> module, latest wins
  for (const auto& cmd : program.commands) {
    StepKey key{&cmd, {}};
    key.ref_modules.resize(cmd.args.size());
    for (std::size_t i = 0; i < cmd.args.size(); ++i) {
      if (const auto* ref = std::get_if<VarRef>(&cmd.args[i].value)) {
        auto it = defined_by.find(ref->name);
        if (it != defined_by.end()) key.ref_modules[i] = it->second;
      }
    }
    defined_by[cmd.output_var] = cmd.module_name;
    keys.push_back(std::move(key));
  }
  return keys;
}

bool literal_equal(const Literal& a, const Literal& b) {
  auto numeric = [](const Literal& l) {
    return l.kind == Literal::Kind::Integer || l.kind == Literal::Kind::Real;
  };
  if (numeric(a) && numeric(b)) {
    double av = a.kind == Literal::Kind::Integer ? static_cast<double>(a.integer) : a.real;
    double bv = b.kind == Literal::Kind::Integer ? static_cast<double>(b.integer) : b.real;
    return std::abs(av - bv) <= kRealTolerance;
  }
  return a == b;
}

bool steps_equal(const StepKey& a, const StepKey& b) {
  if (a.cmd->module_name != b.cmd->module_name) return false;
  if (a.cmd->args.size() != b.cmd->args.size()) return false;
  for (std::size_t i = 0; i < a.cmd->args.size(); ++i) {
    const auto& arg_a = a.cmd->args[i];
    // Argument order is free; match by name.
    std::size_t j = 0;
    for (; j < b.cmd->args.size(); ++j)
      if (b.cmd->args[j].name == arg_a.name) break;
    if (j == b.cmd->args.size()) return false;
    const auto& arg_b = b.cmd->args[j];

    const auto* ref_a = std::get_if<VarRef>(&arg_a.value);
    const auto* ref_b = std::get_if<VarRef>(&arg_b.value);
    if ((ref_a == nullptr) != (ref_b == nullptr)) return false;
    if (ref_a) {
      // Provenance when both refs resolve; spelling when either dangles (a
      // candidate may omit the defining step and still name the variable).
      bool both_defined = !a.ref_modules[i].empty() && !b.ref_modules[j].empty();
      if (both_defined ? a.ref_modules[i] != b.ref_modules[j] : ref_a->name != ref_b->name)
        return false;
    } else if (!literal_equal(std::get<Literal>(arg_a.value), std::get<Literal>(arg_b.value))) {
      return false;
    }
  }
  return true;
}

}  // namespace

ProgramMatch match_programs(const StProgram& candidate, const StProgram& gold) {
  auto ck = build_keys(candidate);
  auto gk = build_keys(gold);
  const int n = static_cast<int>(ck.size()), m = static_cast<int>(gk.size());

  // Standard LCS table over step equality.
  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (int i = n - 1; i >= 0; --i)
    for (int j = m - 1; j >= 0; --j)
      lcs[i][j] = steps_equal(ck[i], gk[j]) ? lcs[i + 1][j + 1] + 1
                                            : std::max(lcs[i + 1][j], lcs[i][j + 1]);

  std::vector<bool> cand_matched(n, false), gold_matched(m, false);
  for (int i = 0, j = 0; i < n && j < m;) {
    if (steps_equal(ck[i], gk[j]) && lcs[i][j] == lcs[i + 1][j + 1] + 1) {
      cand_matched[i] = gold_matched[j] = true;
      ++i;
      ++j;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }

  ProgramMatch match;
  match.tp = lcs[0][0];
  match.fp = n - match.tp;
  match.fn_ = m - match.tp;

  // Status detail: unmatched candidate steps that share a module with an
  // unmatched gold step count as "wrong" rather than "extra".
  std::vector<bool> gold_consumed = gold_matched;
  for (int i = 0; i < n; ++i) {
    if (cand_matched[i]) {
      match.per_step.push_back({i + 1, StepStatus::Match});
      continue;
    }
    bool wrong = false;
    for (int j = 0; j < m; ++j) {
      if (gold_consumed[j]) continue;
      if (gk[j].cmd->module_name == ck[i].cmd->module_name) {
        gold_consumed[j] = true;
        wrong = true;
        break;
      }
    }
    match.per_step.push_back({i + 1, wrong ? StepStatus::Wrong : StepStatus::Extra});
  }
  for (int j = 0; j < m; ++j)
    if (!gold_matched[j]) match.per_step.push_back({j + 1, StepStatus::Missing});

  match.precision = (match.tp + match.fp) > 0
                        ? static_cast<double>(match.tp) / (match.tp + match.fp)
                        : (match.fp == 0 ? 1.0 : 0.0);
  match.recall = (match.tp + match.fn_) > 0
                     ? static_cast<double>(match.tp) / (match.tp + match.fn_)
                     : (match.fn_ == 0 ? 1.0 : 0.0);
  match.f1 = (match.precision + match.recall) > 0
                 ? 2.0 * match.precision * match.recall / (match.precision + match.recall)
                 : 0.0;
  return match;
}

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool looks_like_timestamp(const std::string& text, std::size_t i);

// True when [pos, pos+len) lies inside a `YYYY-MM-DD HH:MM:SS` span; "12"
// must not match the 12 in "...12:05:00".
bool inside_timestamp(const std::string& text, std::size_t pos, std::size_t len) {
  if (len >= 19) return false;  // the token is itself a timestamp
  std::size_t first = pos >= 18 ? pos - 18 : 0;
  for (std::size_t s = first; s <= pos; ++s)
    if (looks_like_timestamp(text, s) && pos + len <= s + 19) return true;
  return false;
}

// Word-aligned case-insensitive token search from `from`.
std::size_t find_token(const std::string& haystack, const std::string& token, std::size_t from) {
  std::string h = lower(haystack), t = lower(token);
  for (std::size_t pos = h.find(t, from); pos != std::string::npos; pos = h.find(t, pos + 1)) {
    bool left_ok = pos == 0 || !is_word_char(h[pos - 1]) || !is_word_char(t.front());
    std::size_t end = pos + t.size();
    bool right_ok = end >= h.size() || !is_word_char(h[end]) || !is_word_char(t.back());
    if (left_ok && right_ok && !inside_timestamp(haystack, pos, t.size())) return pos;
  }
  return std::string::npos;
}

std::vector<std::string> name_tokens(const std::string& name) {
  std::vector<std::string> tokens;
  std::istringstream in(name);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

constexpr std::size_t kChainWindow = 200;   // max gap between chained tokens
constexpr std::size_t kValueWindow = 120;   // max gap between name and value

std::size_t line_end_after(const std::string& text, std::size_t pos) {
  std::size_t nl = text.find('\n', pos);
  return nl == std::string::npos ? text.size() : nl;
}

// Position right after the last token of the chain, or npos. The whole chain
// must sit on one line: answers state one fact per line, and an index token
// must not walk into the next fact's line.
std::size_t find_name_chain(const std::string& answer, const std::string& name,
                            std::size_t from) {
  auto tokens = name_tokens(name);
  if (tokens.empty()) return std::string::npos;
  std::size_t pos = find_token(answer, tokens[0], from);
  while (pos != std::string::npos) {
    std::size_t cursor = pos + tokens[0].size();
    std::size_t line_end = line_end_after(answer, pos);
    bool ok = true;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      std::size_t next = find_token(answer, tokens[k], cursor);
      if (next == std::string::npos || next > cursor + kChainWindow || next >= line_end) {
        ok = false;
        break;
      }
      cursor = next + tokens[k].size();
    }
    if (ok) return cursor;
    pos = find_token(answer, tokens[0], pos + 1);
  }
  return std::string::npos;
}

bool looks_like_timestamp(const std::string& text, std::size_t i) {
  if (i + 19 > text.size()) return false;
  static const char* pattern = "dddd-dd-dd dd:dd:dd";
  for (std::size_t k = 0; k < 19; ++k) {
    char want = pattern[k], got = text[i + k];
    if (want == 'd' ? !std::isdigit(static_cast<unsigned char>(got)) : got != want) return false;
  }
  return true;
}

std::optional<double> first_number_after(const std::string& text, std::size_t from) {
  std::size_t limit = std::min({text.size(), from + kValueWindow, line_end_after(text, from)});
  for (std::size_t i = from; i < limit; ++i) {
    char c = text[i];
    if (looks_like_timestamp(text, i)) {  // dates are labels, not values
      i += 18;
      continue;
    }
    bool digit_start = std::isdigit(static_cast<unsigned char>(c)) ||
                       ((c == '-' || c == '+') && i + 1 < limit &&
                        std::isdigit(static_cast<unsigned char>(text[i + 1])));
    if (!digit_start) continue;
    if (i > 0 && is_word_char(text[i - 1])) continue;  // embedded in an identifier
    std::size_t j = i;
    if (c == '-' || c == '+') ++j;
    bool saw_dot = false;
    while (j < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[j])) || (text[j] == '.' && !saw_dot))) {
      if (text[j] == '.') {
        // A trailing period is sentence punctuation, not a decimal point.
        if (j + 1 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[j + 1]))) break;
        saw_dot = true;
      }
      ++j;
    }
    return parse_number(text.substr(i, j - i));
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> extract_number_near(const std::string& answer, const std::string& name) {
  std::size_t from = 0;
  while (true) {
    std::size_t after = find_name_chain(answer, name, from);
    if (after == std::string::npos) return std::nullopt;
    if (auto v = first_number_after(answer, after)) return v;
    from = after;
  }
}

bool text_appears_near(const std::string& answer, const std::string& name,
                       const std::string& expected) {
  std::size_t after = find_name_chain(answer, name, 0);
  while (after != std::string::npos) {
    std::size_t pos = find_token(answer, expected, after);
    if (pos != std::string::npos && pos <= after + kValueWindow &&
        pos < line_end_after(answer, after))
      return true;
    after = find_name_chain(answer, name, after);
  }
  return false;
}

std::string render_prompt_template(const std::string& tmpl, const std::string& query,
                                   const std::string& answer, const std::string& ground_truth) {
  std::string out = tmpl;
  auto replace_all = [&out](const std::string& slot, const std::string& text) {
    for (std::size_t pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos))
      out.replace(pos, slot.size(), text), pos += text.size();
  };
  replace_all("{query}", query);
  replace_all("{answer}", answer);
  replace_all("{ground_truth}", ground_truth);
  return out;
}

namespace {

std::string constraints_text(const GroundTruth& truth) {
  std::string out;
  for (const auto& c : truth.constraints) {
    out += "- ";
    out += c.description.empty()
               ? c.field + " " + c.comparator + " " + format_number(c.value)
               : c.description;
    out += '\n';
  }
  return out;
}

std::string components_text(const GroundTruth& truth) {
  std::string out;
  for (const auto& c : truth.components) {
    out += "- " + c.name + ": ";
    if (const double* d = std::get_if<double>(&c.expected))
      out += format_number(*d) + " (tolerance " + format_number(c.tolerance) + ")";
    else
      out += std::get<std::string>(c.expected);
    out += '\n';
  }
  return out;
}

bool check_holds(double found, const std::string& comparator, double value) {
  if (comparator == "<=") return found <= value + kRealTolerance;
  if (comparator == ">=") return found >= value - kRealTolerance;
  if (comparator == "<") return found < value;
  if (comparator == ">") return found > value;
  if (comparator == "==") return std::abs(found - value) <= kRealTolerance;
  if (comparator == "!=") return std::abs(found - value) > kRealTolerance;
  throw Error(ErrKind::Config, "unknown comparator '" + comparator + "'");
}

}  // namespace

ScoreDetail score_constraint(const std::string& answer, const GroundTruth& truth,
                             CompletionBackend* judge, const std::string& prompt_template,
                             const std::string& query) {
  ScoreDetail result;
  if (truth.constraints.empty()) {
    result.score01 = 1;
    result.detail = "vacuous";
    return result;
  }

  if (judge) {
    std::string tmpl = prompt_template.empty() ? default_constraint_prompt() : prompt_template;
    std::string prompt = render_prompt_template(tmpl, query, answer, constraints_text(truth));
    std::string reply;
    try {
      reply = complete_with_retry(*judge, prompt);
    } catch (const Error& e) {
      throw Error(ErrKind::Judge, std::string("constraint judge: ") + e.what());
    }
    std::string low = lower(reply);
    std::size_t t = low.find("true"), f = low.find("false");
    if (t == std::string::npos && f == std::string::npos)
      throw Error(ErrKind::Judge, "constraint judge reply carries no True/False verdict");
    result.score01 = (f == std::string::npos || (t != std::string::npos && t < f)) ? 1 : 0;
    result.detail = "judge verdict";
    return result;
  }

  bool all_ok = true;
  for (const auto& check : truth.constraints) {
    auto found = extract_number_near(answer, check.field);
    if (!found) {
      all_ok = false;
      result.per_item.push_back(check.field + ": not found in answer");
      continue;
    }
    bool ok = check_holds(*found, check.comparator, check.value);
    all_ok = all_ok && ok;
    result.per_item.push_back(check.field + " = " + format_number(*found) + " " +
                              check.comparator + " " + format_number(check.value) +
                              (ok ? ": ok" : ": violated"));
  }
  result.score01 = all_ok ? 1 : 0;
  result.detail = all_ok ? "all constraints satisfied" : "constraint violation";
  return result;
}

ScoreDetail score_factuality(const std::string& answer, const GroundTruth& truth,
                             CompletionBackend* judge, const std::string& prompt_template,
                             const std::string& query) {
  ScoreDetail result;
  if (truth.components.empty()) {
    result.ratio = 1.0;
    result.detail = "no expected components";
    return result;
  }

  if (judge) {
    std::string tmpl = prompt_template.empty() ? default_factuality_prompt() : prompt_template;
    std::string prompt = render_prompt_template(tmpl, query, answer, components_text(truth));
    std::string reply;
    try {
      reply = complete_with_retry(*judge, prompt);
    } catch (const Error& e) {
      throw Error(ErrKind::Judge, std::string("factuality judge: ") + e.what());
    }
    std::string low = lower(reply);
    int correct = 0;
    for (const auto& comp : truth.components) {
      std::size_t pos = low.find(lower(comp.name));
      bool ok = false;
      if (pos != std::string::npos) {
        std::size_t line_end = low.find('\n', pos);
        std::string rest = low.substr(pos, (line_end == std::string::npos ? low.size() : line_end) - pos);
        // "incorrect" contains "correct"; test the negative first.
        ok = rest.find("incorrect") == std::string::npos &&
             rest.find("correct") != std::string::npos;
      }
      correct += ok ? 1 : 0;
      result.per_item.push_back(comp.name + (ok ? ": correct" : ": incorrect"));
    }
    result.ratio = static_cast<double>(correct) / static_cast<double>(truth.components.size());
    result.detail = "judge verdicts";
    return result;
  }

  int correct = 0;
  for (const auto& comp : truth.components) {
    std::vector<std::string> names{comp.name};
    names.insert(names.end(), comp.synonyms.begin(), comp.synonyms.end());
    bool ok = false;
    for (const auto& name : names) {
      if (const double* expected = std::get_if<double>(&comp.expected)) {
        auto found = extract_number_near(answer, name);
        if (found && std::abs(*found - *expected) <= comp.tolerance + kRealTolerance) {
          ok = true;
          break;
        }
      } else if (text_appears_near(answer, name, std::get<std::string>(comp.expected))) {
        ok = true;
        break;
      }
    }
    correct += ok ? 1 : 0;
    result.per_item.push_back(comp.name + (ok ? ": correct" : ": missing or wrong"));
  }
  result.ratio = static_cast<double>(correct) / static_cast<double>(truth.components.size());
  result.detail = std::to_string(correct) + "/" + std::to_string(truth.components.size()) +
                  " components correct";
  return result;
}

int score_coherence(const std::string& answer, CompletionBackend& judge,
                    const std::string& prompt_template, const std::string& query) {
  std::string tmpl = prompt_template.empty() ? default_coherence_prompt() : prompt_template;
  std::string prompt = render_prompt_template(tmpl, query, answer, "");
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = complete_with_retry(judge, prompt);
    } catch (const Error& e) {
      throw Error(ErrKind::Judge, std::string("coherence judge: ") + e.what());
    }
    for (std::size_t i = 0; i < reply.size(); ++i) {
      if (reply[i] < '1' || reply[i] > '3') continue;
      bool left = i == 0 || !is_word_char(reply[i - 1]);
      bool right = i + 1 >= reply.size() || !is_word_char(reply[i + 1]);
      if (left && right) return reply[i] - '0';
    }
  }
  throw Error(ErrKind::UnparseableVerdict, "coherence judge did not produce a 1-3 rating twice");
}

ForecastError forecast_error(const std::vector<double>& preds, const std::vector<double>& truth) {
  if (preds.size() != truth.size())
    throw Error(ErrKind::LengthMismatch,
                "got " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(truth.size()) + " truth values");
  if (preds.empty()) return {};
  double abs_sum = 0, sq_sum = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double d = preds[i] - truth[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  double n = static_cast<double>(preds.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

std::vector<double> postprocess_baseline(const std::vector<double>& preds, int horizon_steps) {
  if (horizon_steps < 1) throw Error(ErrKind::Config, "horizon_steps must be >= 1");
  const auto h = static_cast<std::size_t>(horizon_steps);
  if (preds.size() > h)
    throw Error(ErrKind::TooManyPredictions,
                std::to_string(preds.size()) + " predictions for a " + std::to_string(h) +
                    "-step horizon");
  if (preds.empty()) return std::vector<double>(h, 0.0);
  std::vector<double> out = preds;
  out.resize(h, preds.back());
  return out;
}

const char* default_constraint_prompt() {
  return
      "You are verifying whether an answer satisfies every constraint stated in a query.\n"
      "Query:\n{query}\n\n"
      "Answer:\n{answer}\n\n"
      "Constraints to verify:\n{ground_truth}\n"
      "Check each constraint against the answer. Reply with exactly one word: True if every "
      "constraint is satisfied, False otherwise.\n";
}

const char* default_factuality_prompt() {
  return
      "You are verifying the factual content of an answer against expected analytical "
      "components.\n"
      "Query:\n{query}\n\n"
      "Answer:\n{answer}\n\n"
      "Expected components:\n{ground_truth}\n"
      "For each expected component, reply on its own line with the component name followed by "
      "': correct' when the answer states it within tolerance, or ': incorrect' otherwise.\n";
}

const char* default_coherence_prompt() {
  return
      "You are rating the clarity and logical progression of an answer.\n"
      "Query:\n{query}\n\n"
      "Answer:\n{answer}\n\n"
      "Rate the answer's coherence on a 3-point scale: 3 means clear and logically ordered "
      "throughout, 2 means mostly coherent with minor gaps, 1 means disorganized or hard to "
      "follow. Reply with the single digit 1, 2 or 3.\n";
}

}  // namespace streason
