#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "streason/datahub.hpp"
#include "streason/stprogram.hpp"
#include "streason/util.hpp"

namespace streason::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("streason_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

private:
  std::filesystem::path path_;
};

// The seed-42 benchmark dataset, synthesized once per test binary.
inline const std::string& shared_dataset() {
  static TempDir dir("ds42");
  static const std::string root = [] {
    synth_dataset(42, default_synth_config(), dir.str());
    return dir.str();
  }();
  return root;
}

inline Frame make_frame(const std::vector<double>& values, const std::string& start_text,
                        int time_int, std::string sensor = "S1") {
  Frame f;
  f.feature = "traffic speed";
  f.region = "BAY";
  f.sensor_ids = {std::move(sensor)};
  f.time_int = time_int;
  Timestamp start = *parse_timestamp(start_text);
  f.values.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    f.times.push_back(start.plus_minutes(static_cast<std::int64_t>(i) * time_int));
    f.values(static_cast<Eigen::Index>(i), 0) = values[i];
  }
  return f;
}

// Grammar-driven program generator for round-trip fuzzing. Only emits shapes
// the parser itself can produce (no text literal may match the timestamp
// pattern).
class ProgramFuzzer {
public:
  explicit ProgramFuzzer(std::uint64_t seed) : rng_(seed) {}

  StProgram next() {
    StProgram program;
    int n = static_cast<int>(rng_.below(9));
    std::vector<std::string> bound;
    for (int i = 0; i < n; ++i) {
      Command cmd;
      cmd.output_var = ident();
      cmd.module_name = ident();
      cmd.line_no = i + 1;
      int args = static_cast<int>(rng_.below(7));
      for (int a = 0; a < args; ++a) {
        std::string name;
        do {
          name = param();
        } while (cmd.find_arg(name));
        cmd.args.push_back({name, value(bound)});
      }
      bound.push_back(cmd.output_var);
      program.commands.push_back(std::move(cmd));
    }
    return program;
  }

private:
  std::string ident() {
    static const char* pool[] = {"DATA", "PREDS", "OUT", "X", "EVENTS", "R2", "A_B", "VAR9"};
    return pool[rng_.below(std::size(pool))];
  }

  std::string param() {
    static const char* pool[] = {"data", "time_int", "constraint", "x", "alpha9", "a_b", "v"};
    return pool[rng_.below(std::size(pool))];
  }

  ArgValue value(const std::vector<std::string>& bound) {
    switch (rng_.below(bound.empty() ? 5 : 6)) {
      case 0: return Literal::make_integer(static_cast<std::int64_t>(rng_.next()) >> 12);
      case 1: {
        double v;
        do {
          // Wide range of magnitudes, always finite.
          v = (rng_.uniform() * 2.0 - 1.0) * std::pow(10.0, double(rng_.below(40)) - 20.0);
        } while (!std::isfinite(v));
        return Literal::make_real(v);
      }
      case 2: {
        std::string s;
        std::size_t len = rng_.below(12);
        for (std::size_t i = 0; i < len; ++i) {
          char c = static_cast<char>(32 + rng_.below(95));
          s += c;
        }
        if (parse_timestamp(s)) s += "x";  // keep it a text literal
        return Literal::make_text(s);
      }
      case 3: {
        std::int64_t minutes = static_cast<std::int64_t>(rng_.below(200000));
        return Literal::make_timestamp(
            parse_timestamp("2016-01-01 00:00:00")->plus_minutes(minutes));
      }
      case 4: return Literal::make_none();
      default: return VarRef{bound[rng_.below(bound.size())]};
    }
  }

  Rng rng_;
};

}  // namespace streason::testing
