#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "streason/registry.hpp"
#include "streason/timestamp.hpp"

namespace streason {

// A literal argument value. Text literals whose content happens to match the
// timestamp pattern are unreachable from the parser (they classify as
// Timestamp); construct them only if you know what you are doing.
struct Literal {
  enum class Kind { Text, Integer, Real, Timestamp, None };

  Kind kind = Kind::None;
  std::string text;
  std::int64_t integer = 0;
  double real = 0.0;
  streason::Timestamp ts{};

  static Literal make_text(std::string s);
  static Literal make_integer(std::int64_t v);
  static Literal make_real(double v);
  static Literal make_timestamp(streason::Timestamp t);
  static Literal make_none();

  bool operator==(const Literal& o) const;
};

struct VarRef {
  std::string name;  // [A-Z][A-Z0-9_]*
  bool operator==(const VarRef&) const = default;
};

using ArgValue = std::variant<Literal, VarRef>;

struct Arg {
  std::string name;  // [a-z][a-z0-9_]*
  ArgValue value;
  bool operator==(const Arg&) const = default;
};

struct Command {
  std::string output_var;
  std::string module_name;
  std::vector<Arg> args;  // ordered; names unique within the command
  int line_no = 0;        // 1-based source line; not part of structural equality

  const ArgValue* find_arg(std::string_view name) const;

  bool operator==(const Command& o) const {
    return output_var == o.output_var && module_name == o.module_name && args == o.args;
  }
};

struct StProgram {
  std::vector<Command> commands;
  std::string source_text;

  bool operator==(const StProgram& o) const { return commands == o.commands; }
};

// Grammar, one command per line:
//   OUT = MODULE(name1=value1, name2=value2, ...)
// Values: double-quoted strings (a quoted `YYYY-MM-DD HH:MM:SS` is a timestamp
// literal), bare integers, bare reals, `none`, or bare uppercase identifiers
// (variable references). Blank lines and lines starting with `#` are skipped.
// Throws SyntaxError / ReferenceError.
StProgram parse_program(std::string_view source);

// Canonical one-command-per-line text; parse_program(render_program(p)) == p.
std::string render_program(const StProgram& program);
std::string render_command(const Command& cmd);
std::string render_arg_value(const ArgValue& value);

struct ValidationIssue {
  enum class Kind { UnknownModule, UnknownArg, MissingArg };
  Kind kind;
  int line_no;
  std::string detail;
};

// Empty result means: every module exists in the pool, every supplied argument
// is declared, every required parameter is present.
std::vector<ValidationIssue> validate_against_pool(const StProgram& program,
                                                   const FunctionPool& pool);

std::string describe(const ValidationIssue& issue);

bool is_module_ident(std::string_view s);  // [A-Z][A-Z0-9_]*
bool is_param_ident(std::string_view s);   // [a-z][a-z0-9_]*

}  // namespace streason
