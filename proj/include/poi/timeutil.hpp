#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poi {

// Naive calendar date-time. Timezone designators in the input are ignored:
// the clock time is taken as written.
struct Timestamp {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;   // 0..23
  int minute = 0;
  int second = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

namespace detail {

inline bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return kDays[m - 1];
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Inverse of days_from_civil.
inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace detail

// 0 = Monday .. 6 = Sunday.
inline int day_of_week_monday0(const Timestamp& t) {
  const std::int64_t days = detail::days_from_civil(t.year, t.month, t.day);
  return static_cast<int>(((days % 7) + 10) % 7);
}

// Parses "YYYY-MM-DD[T ]HH:MM[:SS[.frac]][Z|+HH:MM|-HH:MM|+HHMM|-HHMM]".
// Offsets and fractional seconds are accepted and discarded.
inline Timestamp parse_timestamp(std::string_view s) {
  const auto fail = [&]() -> Timestamp {
    throw std::runtime_error("unparseable timestamp \"" + std::string(s) + "\"");
  };
  std::size_t pos = 0;
  const auto digits = [&](int count) -> int {
    if (pos + static_cast<std::size_t>(count) > s.size()) fail();
    int v = 0;
    for (int i = 0; i < count; ++i) {
      char c = s[pos + static_cast<std::size_t>(i)];
      if (c < '0' || c > '9') fail();
      v = v * 10 + (c - '0');
    }
    pos += static_cast<std::size_t>(count);
    return v;
  };
  const auto expect = [&](char c) {
    if (pos >= s.size() || s[pos] != c) fail();
    ++pos;
  };

  Timestamp t;
  t.year = digits(4);
  expect('-');
  t.month = digits(2);
  expect('-');
  t.day = digits(2);
  if (pos >= s.size() || (s[pos] != 'T' && s[pos] != ' ')) fail();
  ++pos;
  t.hour = digits(2);
  expect(':');
  t.minute = digits(2);
  if (pos < s.size() && s[pos] == ':') {
    ++pos;
    t.second = digits(2);
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start) fail();
    }
  }
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      ++pos;
      digits(2);
      if (pos < s.size() && s[pos] == ':') ++pos;
      digits(2);
    }
  }
  if (pos != s.size()) fail();

  if (t.month < 1 || t.month > 12) fail();
  if (t.day < 1 || t.day > detail::days_in_month(t.year, t.month)) fail();
  if (t.hour > 23 || t.minute > 59 || t.second > 60) fail();
  return t;
}

}  // namespace poi
