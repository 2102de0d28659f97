#pragma once

// Brute-force program-matching oracle plus randomized perturbation machinery,
// shared by the unit suite and the acceptance suite. Deliberately independent
// of the evalkit implementation: its own step keys, its own recursion.

#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "streason/stprogram.hpp"
#include "streason/util.hpp"

namespace streason::testing {

struct MatchOracle {
  // A reference value keeps both its provenance (module of the defining
  // command, empty when dangling) and its spelling; two refs are equal by
  // provenance when both resolve, by spelling otherwise.
  struct ArgKey {
    bool is_ref = false;
    std::string ref_module;
    std::string ref_name;
    std::string literal;

    bool equals(const ArgKey& o) const {
      if (is_ref != o.is_ref) return false;
      if (!is_ref) return literal == o.literal;
      if (!ref_module.empty() && !o.ref_module.empty()) return ref_module == o.ref_module;
      return ref_name == o.ref_name;
    }
  };

  struct Step {
    std::string module;
    std::map<std::string, ArgKey> args;
  };

  static bool step_equal(const Step& a, const Step& b) {
    if (a.module != b.module || a.args.size() != b.args.size()) return false;
    for (const auto& [name, key] : a.args) {
      auto it = b.args.find(name);
      if (it == b.args.end() || !key.equals(it->second)) return false;
    }
    return true;
  }

  static std::vector<Step> steps_of(const StProgram& p) {
    std::vector<Step> out;
    std::map<std::string, std::string> def;
    for (const auto& cmd : p.commands) {
      Step s;
      s.module = cmd.module_name;
      for (const auto& a : cmd.args) {
        ArgKey key;
        if (const auto* ref = std::get_if<VarRef>(&a.value)) {
          key.is_ref = true;
          key.ref_name = ref->name;
          auto it = def.find(ref->name);
          if (it != def.end()) key.ref_module = it->second;
        } else {
          const auto& lit = std::get<Literal>(a.value);
          switch (lit.kind) {
            case Literal::Kind::Text: key.literal = "txt:" + lit.text; break;
            case Literal::Kind::Integer:
            case Literal::Kind::Real: {
              double v = lit.kind == Literal::Kind::Integer ? double(lit.integer) : lit.real;
              char buf[64];
              std::snprintf(buf, sizeof(buf), "num:%.9f", v);
              key.literal = buf;
              break;
            }
            case Literal::Kind::Timestamp:
              key.literal = "ts:" + std::to_string(lit.ts.epoch_seconds);
              break;
            case Literal::Kind::None: key.literal = "none"; break;
          }
        }
        s.args[a.name] = std::move(key);
      }
      def[cmd.output_var] = cmd.module_name;
      out.push_back(std::move(s));
    }
    return out;
  }

  // Maximal order-preserving matching by plain recursion (fine for <= 8 steps).
  static int best(const std::vector<Step>& a, const std::vector<Step>& b, std::size_t i,
                  std::size_t j) {
    if (i == a.size() || j == b.size()) return 0;
    int r = std::max(best(a, b, i + 1, j), best(a, b, i, j + 1));
    if (step_equal(a[i], b[j])) r = std::max(r, 1 + best(a, b, i + 1, j + 1));
    return r;
  }

  static std::tuple<int, int, int> tp_fp_fn(const StProgram& cand, const StProgram& gold) {
    auto a = steps_of(cand), b = steps_of(gold);
    int tp = best(a, b, 0, 0);
    return {tp, int(a.size()) - tp, int(b.size()) - tp};
  }
};

// Random program over a small vocabulary so perturbations collide often.
inline StProgram random_match_program(Rng& rng, int max_steps = 8) {
  static const char* modules[] = {"LOAD", "TREND", "SEAS", "FORECAST", "REFINE"};
  static const char* params[] = {"data", "x", "k", "t"};
  StProgram p;
  int n = 1 + int(rng.below(max_steps));
  std::vector<std::string> bound;
  for (int i = 0; i < n; ++i) {
    Command cmd;
    cmd.output_var = "V" + std::to_string(i);
    cmd.module_name = modules[rng.below(std::size(modules))];
    cmd.line_no = i + 1;
    int args = int(rng.below(4));
    for (int a = 0; a < args; ++a) {
      std::string name = params[rng.below(std::size(params))];
      if (cmd.find_arg(name)) continue;
      ArgValue v;
      switch (rng.below(bound.empty() ? 3 : 4)) {
        case 0: v = Literal::make_integer(std::int64_t(rng.below(5))); break;
        case 1: v = Literal::make_real(double(rng.below(4)) * 0.5); break;
        case 2: v = Literal::make_text(std::string(1, char('a' + rng.below(3)))); break;
        default: v = VarRef{bound[rng.below(bound.size())]}; break;
      }
      cmd.args.push_back({name, v});
    }
    bound.push_back(cmd.output_var);
    p.commands.push_back(std::move(cmd));
  }
  return p;
}

// Deletions, insertions, argument edits and adjacent swaps.
inline StProgram perturb_program(const StProgram& base, Rng& rng) {
  StProgram p = base;
  int edits = 1 + int(rng.below(3));
  for (int e = 0; e < edits && !p.commands.empty(); ++e) {
    switch (rng.below(4)) {
      case 0:
        p.commands.erase(p.commands.begin() + rng.below(p.commands.size()));
        break;
      case 1: {
        Rng sub(rng.next());
        StProgram extra = random_match_program(sub, 1);
        p.commands.insert(p.commands.begin() + rng.below(p.commands.size() + 1),
                          extra.commands[0]);
        break;
      }
      case 2: {
        auto& cmd = p.commands[rng.below(p.commands.size())];
        if (!cmd.args.empty())
          cmd.args[rng.below(cmd.args.size())].value = Literal::make_integer(977);
        break;
      }
      default: {
        if (p.commands.size() >= 2) {
          std::size_t i = rng.below(p.commands.size() - 1);
          std::swap(p.commands[i], p.commands[i + 1]);
        }
        break;
      }
    }
  }
  return p;
}

}  // namespace streason::testing
