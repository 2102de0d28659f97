#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace streason {

// Naive calendar date-time (no timezone), second resolution. All sensor grids
// in this codebase are minute-aligned; seconds are kept because the wire
// pattern carries them.
struct Timestamp {
  std::int64_t epoch_seconds = 0;

  auto operator<=>(const Timestamp&) const = default;

  Timestamp plus_minutes(std::int64_t m) const { return {epoch_seconds + m * 60}; }
  std::int64_t minutes_until(Timestamp other) const {
    return (other.epoch_seconds - epoch_seconds) / 60;
  }

  // 0 = Monday ... 6 = Sunday.
  int weekday() const;
  bool is_weekend() const { return weekday() >= 5; }
  // Minutes since local midnight.
  int minute_of_day() const;
};

// Strict `YYYY-MM-DD HH:MM:SS` parse; nullopt on any deviation.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

std::int64_t days_from_civil(CivilDate d);
CivilDate civil_from_days(std::int64_t days);

}  // namespace streason
