#include "streason/stprogram.hpp"

#include <charconv>
#include <unordered_set>

#include "streason/errors.hpp"
#include "streason/util.hpp"

namespace streason {

Literal Literal::make_text(std::string s) {
  Literal l;
  l.kind = Kind::Text;
  l.text = std::move(s);
  return l;
}

Literal Literal::make_integer(std::int64_t v) {
  Literal l;
  l.kind = Kind::Integer;
  l.integer = v;
  return l;
}

Literal Literal::make_real(double v) {
  Literal l;
  l.kind = Kind::Real;
  l.real = v;
  return l;
}

Literal Literal::make_timestamp(streason::Timestamp t) {
  Literal l;
  l.kind = Kind::Timestamp;
  l.ts = t;
  return l;
}

Literal Literal::make_none() {
  return Literal{};
}

bool Literal::operator==(const Literal& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Text: return text == o.text;
    case Kind::Integer: return integer == o.integer;
    case Kind::Real: return real == o.real;
    case Kind::Timestamp: return ts == o.ts;
    case Kind::None: return true;
  }
  return false;
}

const ArgValue* Command::find_arg(std::string_view name) const {
  for (const auto& a : args)
    if (a.name == name) return &a.value;
  return nullptr;
}

bool is_module_ident(std::string_view s) {
  if (s.empty() || s[0] < 'A' || s[0] > 'Z') return false;
  for (char c : s)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

bool is_param_ident(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

namespace {

// Single-line cursor with 1-based column reporting.
class LineScanner {
public:
  LineScanner(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

  void skip_ws() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= line_.size();
  }

  char peek() const { return pos_ < line_.size() ? line_[pos_] : '\0'; }

  bool eat(char c) {
    skip_ws();
    if (pos_ < line_.size() && line_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!eat(c)) fail(std::string("expected '") + c + "' " + what);
  }

  [[noreturn]] void fail(const std::string& message) {
    throw syntax_error(line_no_, static_cast<int>(pos_) + 1, message);
  }

  // Identifier made of letters, digits and underscores.
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < line_.size()) {
      char c = line_[pos_];
      if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')
        ++pos_;
      else
        break;
    }
    if (pos_ == start) fail("expected identifier");
    return std::string(line_.substr(start, pos_ - start));
  }

  std::string quoted_string() {
    // Opening quote already consumed.
    std::string out;
    while (pos_ < line_.size()) {
      char c = line_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= line_.size()) fail("unterminated escape");
        char e = line_[pos_++];
        if (e == '"' || e == '\\')
          out += e;
        else if (e == 'n')
          out += '\n';
        else
          fail("unsupported escape sequence");
      } else {
        out += c;
      }
    }
    fail("unterminated string literal");
  }

  Literal number() {
    skip_ws();
    std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    bool saw_digit = false, saw_dot = false, saw_exp = false;
    while (pos_ < line_.size()) {
      char c = line_[pos_];
      if (c >= '0' && c <= '9') {
        saw_digit = true;
        ++pos_;
      } else if (c == '.' && !saw_dot && !saw_exp) {
        saw_dot = true;
        ++pos_;
      } else if ((c == 'e' || c == 'E') && saw_digit && !saw_exp) {
        saw_exp = true;
        ++pos_;
        if (pos_ < line_.size() && (line_[pos_] == '+' || line_[pos_] == '-')) ++pos_;
      } else {
        break;
      }
    }
    if (!saw_digit) fail("malformed number");
    std::string_view tok = line_.substr(start, pos_ - start);
    if (!saw_dot && !saw_exp) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec == std::errc() && p == tok.data() + tok.size()) return Literal::make_integer(v);
      // Out of int64 range: fall through to real.
    }
    double d = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("malformed number");
    return Literal::make_real(d);
  }

  int column() const { return static_cast<int>(pos_) + 1; }

private:
  std::string_view line_;
  int line_no_;
  std::size_t pos_ = 0;
};

ArgValue parse_value(LineScanner& sc) {
  sc.skip_ws();
  char c = sc.peek();
  if (c == '"') {
    sc.eat('"');
    std::string s = sc.quoted_string();
    if (auto ts = parse_timestamp(s)) return Literal::make_timestamp(*ts);
    return Literal::make_text(std::move(s));
  }
  if (c == '+' || c == '-' || (c >= '0' && c <= '9')) return sc.number();
  if (c >= 'A' && c <= 'Z') {
    std::string name = sc.ident();
    if (!is_module_ident(name)) sc.fail("invalid variable reference " + name);
    return VarRef{std::move(name)};
  }
  if (c >= 'a' && c <= 'z') {
    std::string word = sc.ident();
    if (word == "none") return Literal::make_none();
    sc.fail("unexpected bare word '" + word + "' (values are quoted strings, numbers, none, "
            "or uppercase variable names)");
  }
  sc.fail("expected argument value");
  return Literal::make_none();  // unreachable
}

Command parse_command_line(std::string_view line, int line_no) {
  LineScanner sc(line, line_no);
  Command cmd;
  cmd.line_no = line_no;

  cmd.output_var = sc.ident();
  if (!is_module_ident(cmd.output_var))
    sc.fail("output variable must match [A-Z][A-Z0-9_]*, got " + cmd.output_var);
  sc.expect('=', "after output variable");
  cmd.module_name = sc.ident();
  if (!is_module_ident(cmd.module_name))
    sc.fail("module name must match [A-Z][A-Z0-9_]*, got " + cmd.module_name);
  sc.expect('(', "after module name");

  if (!sc.eat(')')) {
    while (true) {
      std::string pname = sc.ident();
      if (!is_param_ident(pname))
        sc.fail("argument name must match [a-z][a-z0-9_]*, got " + pname);
      for (const auto& a : cmd.args)
        if (a.name == pname) sc.fail("duplicate argument name " + pname);
      sc.expect('=', "after argument name");
      cmd.args.push_back({std::move(pname), parse_value(sc)});
      if (sc.eat(')')) break;
      sc.expect(',', "between arguments");
    }
  }
  if (!sc.at_end()) sc.fail("trailing characters after command");
  return cmd;
}

}  // namespace

StProgram parse_program(std::string_view source) {
  StProgram program;
  program.source_text = std::string(source);

  std::unordered_set<std::string> bound;
  int line_no = 0;
  for (const auto& raw : split_lines(source)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    Command cmd = parse_command_line(line, line_no);
    for (const auto& a : cmd.args) {
      if (const auto* ref = std::get_if<VarRef>(&a.value)) {
        if (!bound.count(ref->name)) throw reference_error(line_no, ref->name);
      }
    }
    bound.insert(cmd.output_var);
    program.commands.push_back(std::move(cmd));
  }
  return program;
}

std::string render_arg_value(const ArgValue& value) {
  if (const auto* ref = std::get_if<VarRef>(&value)) return ref->name;
  const auto& lit = std::get<Literal>(value);
  switch (lit.kind) {
    case Literal::Kind::Text: {
      std::string out = "\"";
      for (char c : lit.text) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out += c;
      }
      out += '"';
      return out;
    }
    case Literal::Kind::Integer: return render_int(lit.integer);
    case Literal::Kind::Real: return render_real(lit.real);
    case Literal::Kind::Timestamp: return "\"" + format_timestamp(lit.ts) + "\"";
    case Literal::Kind::None: return "none";
  }
  return "none";
}

std::string render_command(const Command& cmd) {
  std::string out = cmd.output_var + " = " + cmd.module_name + "(";
  for (std::size_t i = 0; i < cmd.args.size(); ++i) {
    if (i) out += ", ";
    out += cmd.args[i].name + "=" + render_arg_value(cmd.args[i].value);
  }
  out += ")";
  return out;
}

std::string render_program(const StProgram& program) {
  std::string out;
  for (const auto& cmd : program.commands) {
    out += render_command(cmd);
    out += '\n';
  }
  return out;
}

std::vector<ValidationIssue> validate_against_pool(const StProgram& program,
                                                   const FunctionPool& pool) {
  std::vector<ValidationIssue> issues;
  for (const auto& cmd : program.commands) {
    const FunctionSpec* spec = pool.find(cmd.module_name);
    if (!spec) {
      issues.push_back({ValidationIssue::Kind::UnknownModule, cmd.line_no,
                        "unknown module " + cmd.module_name});
      continue;
    }
    for (const auto& a : cmd.args) {
      if (!spec->find_param(a.name))
        issues.push_back({ValidationIssue::Kind::UnknownArg, cmd.line_no,
                          cmd.module_name + " does not declare argument '" + a.name + "'"});
    }
    for (const auto& p : spec->params) {
      if (p.required && !cmd.find_arg(p.name))
        issues.push_back({ValidationIssue::Kind::MissingArg, cmd.line_no,
                          cmd.module_name + " requires argument '" + p.name + "'"});
    }
  }
  return issues;
}

std::string describe(const ValidationIssue& issue) {
  const char* kind = issue.kind == ValidationIssue::Kind::UnknownModule ? "UnknownModule"
                     : issue.kind == ValidationIssue::Kind::UnknownArg  ? "UnknownArg"
                                                                        : "MissingArg";
  return "line " + std::to_string(issue.line_no) + " [" + kind + "] " + issue.detail;
}

}  // namespace streason
