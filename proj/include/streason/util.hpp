#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace streason {

// Shortest representation that round-trips through parsing (to_chars). Used by
// the program renderer, where `parse(render(p)) == p` must hold bit-exactly.
std::string render_real(double v);
std::string render_int(std::int64_t v);

// Human-facing number: fixed 6 decimals, trailing zeros trimmed. Every number
// placed into answer text goes through this so ground-truth components can be
// compared against re-extracted values exactly.
std::string format_number(double v);

// format_number followed by a parse; the canonical value of a number as it
// appears in answer text.
double printed_value(double v);

std::optional<double> parse_number(std::string_view s);

std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split_lines(std::string_view text);
std::string trim(std::string_view s);

// Deterministic RNG used everywhere randomness is needed. Distributions are
// hand-rolled: libstdc++'s distribution objects are implementation-defined,
// which would break byte-identical synthesis across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace streason
