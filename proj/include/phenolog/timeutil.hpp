/*
 * Copyright 2026 The phenolog Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Instants with a retained UTC offset. Ordering uses the absolute UTC time;
// calendar questions (day, weekday, hour) use the local wall clock implied by
// the instant's own offset.

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "phenolog/error.hpp"

namespace phenolog {

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Instant {
  std::int64_t utc_seconds = 0;  // seconds since 1970-01-01T00:00:00Z
  int offset_minutes = 0;        // local = utc + offset

  std::int64_t local_seconds() const {
    return utc_seconds + std::int64_t{offset_minutes} * 60;
  }
  // Days since the epoch on the local calendar.
  std::int64_t local_day() const {
    return floor_div(local_seconds(), kSecondsPerDay);
  }
  // Local hour-of-day as a real in [0, 24).
  double local_hour() const {
    const auto s = local_seconds() - local_day() * kSecondsPerDay;
    return static_cast<double>(s) / kSecondsPerHour;
  }
  int local_hour_bin() const {
    return static_cast<int>((local_seconds() - local_day() * kSecondsPerDay) /
                            kSecondsPerHour);
  }
  // ISO weekday of the local calendar day, 1 = Monday ... 7 = Sunday.
  unsigned local_iso_weekday() const {
    using namespace std::chrono;
    return weekday{sys_days{days{local_day()}}}.iso_encoding();
  }
  bool is_weekend() const { return local_iso_weekday() >= 6; }

  Instant plus_seconds(std::int64_t s) const {
    return Instant{utc_seconds + s, offset_minutes};
  }

  // Identity is (utc, offset); ordering only looks at utc.
  friend bool operator==(const Instant&, const Instant&) = default;
};

inline bool earlier(const Instant& a, const Instant& b) {
  return a.utc_seconds < b.utc_seconds;
}

inline double hours_between(const Instant& from, const Instant& to) {
  return static_cast<double>(to.utc_seconds - from.utc_seconds) /
         kSecondsPerHour;
}

namespace detail {

inline bool read_digits(std::string_view s, std::size_t pos, std::size_t n,
                        int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

// Parses "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)". Fractional seconds are
// truncated. When the offset is absent, `assume_offset_minutes` is used if
// given, otherwise the timestamp is rejected.
inline Instant parse_rfc3339(std::string_view s,
                             std::optional<int> assume_offset_minutes = {}) {
  using namespace std::chrono;
  auto fail = [&](const char* why) -> InputError {
    return InputError("bad timestamp '" + std::string(s) + "': " + why);
  };
  int Y, M, D, h, m, sec;
  if (!detail::read_digits(s, 0, 4, Y) || s.size() < 19 || s[4] != '-' ||
      !detail::read_digits(s, 5, 2, M) || s[7] != '-' ||
      !detail::read_digits(s, 8, 2, D) ||
      (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      !detail::read_digits(s, 11, 2, h) || s[13] != ':' ||
      !detail::read_digits(s, 14, 2, m) || s[16] != ':' ||
      !detail::read_digits(s, 17, 2, sec)) {
    throw fail("expected YYYY-MM-DDTHH:MM:SS");
  }
  const year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)},
                           day{static_cast<unsigned>(D)}};
  if (!ymd.ok()) throw fail("invalid calendar date");
  if (h > 23 || m > 59 || sec > 59) throw fail("invalid time of day");

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) throw fail("empty fractional seconds");
  }
  int offset = 0;
  if (pos == s.size()) {
    if (!assume_offset_minutes) throw fail("missing UTC offset");
    offset = *assume_offset_minutes;
  } else if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!detail::read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() ||
        s[pos + 3] != ':' || !detail::read_digits(s, pos + 4, 2, om) ||
        oh > 23 || om > 59) {
      throw fail("malformed UTC offset");
    }
    offset = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
    pos += 6;
  } else {
    throw fail("unexpected trailing characters");
  }
  if (pos != s.size()) throw fail("unexpected trailing characters");

  const std::int64_t local = std::int64_t{sys_days{ymd}.time_since_epoch().count()} *
                                 kSecondsPerDay +
                             h * kSecondsPerHour + m * 60 + sec;
  return Instant{local - std::int64_t{offset} * 60, offset};
}

inline std::string format_rfc3339(const Instant& t) {
  using namespace std::chrono;
  const auto day_index = t.local_day();
  const year_month_day ymd{sys_days{days{day_index}}};
  const auto sod = t.local_seconds() - day_index * kSecondsPerDay;
  char buf[40];
  const int off = t.offset_minutes;
  const int aoff = off < 0 ? -off : off;
  if (off == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()),
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d%c%02d:%02d",
                  static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()),
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60), off < 0 ? '-' : '+', aoff / 60,
                  aoff % 60);
  }
  return buf;
}

// Parses "+HH:MM", "-HH:MM" or "Z" into minutes.
inline int parse_offset(std::string_view s) {
  if (s == "Z" || s == "z") return 0;
  int oh, om;
  if (s.size() != 6 || (s[0] != '+' && s[0] != '-') || s[3] != ':' ||
      !detail::read_digits(s, 1, 2, oh) || !detail::read_digits(s, 4, 2, om) ||
      oh > 23 || om > 59) {
    throw InputError("bad UTC offset '" + std::string(s) +
                     "' (expected +HH:MM or -HH:MM)");
  }
  return (oh * 60 + om) * (s[0] == '-' ? -1 : 1);
}

}  // namespace phenolog
