#include "streason/timestamp.hpp"

#include <cstdio>

namespace streason {

std::int64_t days_from_civil(CivilDate d) {
  // Howard Hinnant's algorithm, proleptic Gregorian calendar.
  std::int64_t y = d.year;
  y -= d.month <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int Timestamp::weekday() const {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds < 0 && epoch_seconds % 86400 != 0) --days;
  // 1970-01-01 was a Thursday (weekday 3 with Monday == 0).
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

int Timestamp::minute_of_day() const {
  std::int64_t sec = epoch_seconds % 86400;
  if (sec < 0) sec += 86400;
  return static_cast<int>(sec / 60);
}

namespace {

bool all_digits(std::string_view s) {
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  // YYYY-MM-DD HH:MM:SS, fixed width.
  if (text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' || text[16] != ':')
    return std::nullopt;
  auto year_s = text.substr(0, 4), mon_s = text.substr(5, 2), day_s = text.substr(8, 2);
  auto hh_s = text.substr(11, 2), mm_s = text.substr(14, 2), ss_s = text.substr(17, 2);
  for (auto part : {year_s, mon_s, day_s, hh_s, mm_s, ss_s})
    if (!all_digits(part)) return std::nullopt;
  int year = to_int(year_s), month = to_int(mon_s), day = to_int(day_s);
  int hh = to_int(hh_s), mm = to_int(mm_s), ss = to_int(ss_s);
  if (month < 1 || month > 12 || day < 1 || hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dmax = mdays[month - 1];
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) dmax = 29;
  if (day > dmax) return std::nullopt;
  std::int64_t days = days_from_civil({year, month, day});
  return Timestamp{days * 86400 + hh * 3600 + mm * 60 + ss};
}

std::string format_timestamp(Timestamp t) {
  std::int64_t days = t.epoch_seconds / 86400;
  std::int64_t sec = t.epoch_seconds % 86400;
  if (sec < 0) {
    sec += 86400;
    --days;
  }
  CivilDate d = civil_from_days(days);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", d.year, d.month, d.day,
                static_cast<int>(sec / 3600), static_cast<int>((sec % 3600) / 60),
                static_cast<int>(sec % 60));
  return buf;
}

}  // namespace streason
