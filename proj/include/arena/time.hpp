#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace arena {

using Seconds = std::chrono::seconds;
/// UTC instant at one-second resolution.
using Instant = std::chrono::sys_seconds;
/// Proleptic Gregorian calendar date.
using Date = std::chrono::year_month_day;

/// Wall-clock time of day, minutes since local midnight.
struct TimeOfDay {
  int hour = 0;
  int minute = 0;

  Seconds since_midnight() const { return Seconds{hour * 3600 + minute * 60}; }
  bool operator==(const TimeOfDay &) const = default;
};

/// Wall-clock date and time with no zone attached, stored as if it were UTC.
using LocalSeconds = std::chrono::local_seconds;

std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date &date);
Date add_days(const Date &date, int days);
int days_between(const Date &from, const Date &to);

std::optional<TimeOfDay> parse_time_of_day(std::string_view text);
std::string format_time_of_day(const TimeOfDay &time);

/// RFC 3339 with a `Z` or numeric offset; fractional seconds are truncated.
std::optional<Instant> parse_instant(std::string_view text);
/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_instant(Instant instant);

/// ISO-8601 duration subset: `PnW`, `PnDTnHnMnS`. Days are 86400 seconds.
std::optional<Seconds> parse_duration(std::string_view text);
std::string format_duration(Seconds duration);

}  // namespace arena
