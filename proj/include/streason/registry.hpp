#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace streason {

enum class ParamKind { Text, Integer, Real, Timestamp, Frame, Series, Report, Any };

const char* param_kind_name(ParamKind k);        // stable token for pool files
const char* param_kind_prompt_name(ParamKind k); // type tag shown in prompts
std::optional<ParamKind> param_kind_from_name(std::string_view s);

struct ParamSpec {
  std::string name;  // [a-z][a-z0-9_]*
  ParamKind kind = ParamKind::Text;
  bool required = true;
  std::string description;

  bool operator==(const ParamSpec&) const = default;
};

struct FunctionSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  std::string returns;

  const ParamSpec* find_param(std::string_view pname) const;
  // `NAME(p1, p2, ...)`
  std::string signature() const;

  bool operator==(const FunctionSpec&) const = default;
};

// Ordered catalog of callable modules. Order matters: prompts render specs in
// catalog order.
class FunctionPool {
public:
  void add(FunctionSpec spec);  // FormatError on duplicate name or params
  const FunctionSpec* find(std::string_view name) const;
  const std::vector<FunctionSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }

  bool operator==(const FunctionPool& other) const { return specs_ == other.specs_; }

private:
  std::vector<FunctionSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// The twelve built-in module specs.
FunctionPool default_pool();

std::string render_pool_prompt(const FunctionPool& pool);

FunctionPool load_pool(const std::string& path);
void save_pool(const FunctionPool& pool, const std::string& path);

}  // namespace streason
