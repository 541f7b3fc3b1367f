#include "arena/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace arena {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t width, int &out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i)
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  auto res = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return res.ec == std::errc{};
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  int y, m, d;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d))
    return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date &date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Date add_days(const Date &date, int days) {
  return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

int days_between(const Date &from, const Date &to) {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

std::optional<TimeOfDay> parse_time_of_day(std::string_view text) {
  int h, m;
  if (text.size() != 5 || text[2] != ':') return std::nullopt;
  if (!read_int(text, 0, 2, h) || !read_int(text, 3, 2, m)) return std::nullopt;
  if (h > 23 || m > 59) return std::nullopt;
  return TimeOfDay{h, m};
}

std::string format_time_of_day(const TimeOfDay &time) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", time.hour, time.minute);
  return buf;
}

std::optional<Instant> parse_instant(std::string_view text) {
  if (text.size() < 20) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date || (text[10] != 'T' && text[10] != 't' && text[10] != ' ')) return std::nullopt;
  int h, mi, s;
  if (!read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, s))
    return std::nullopt;
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;
  int offset = 0;
  char zone = text[pos];
  if (zone == 'Z' || zone == 'z') {
    if (pos + 1 != text.size()) return std::nullopt;
  } else if (zone == '+' || zone == '-') {
    int oh, om;
    if (text.size() != pos + 6 || !read_int(text, pos + 1, 2, oh) || text[pos + 3] != ':' ||
        !read_int(text, pos + 4, 2, om))
      return std::nullopt;
    offset = (oh * 3600 + om * 60) * (zone == '+' ? 1 : -1);
  } else {
    return std::nullopt;
  }
  Instant local = std::chrono::sys_days{*date} + Seconds{h * 3600 + mi * 60 + s};
  return local - Seconds{offset};
}

std::string format_instant(Instant instant) {
  auto day = std::chrono::floor<std::chrono::days>(instant);
  Date date{day};
  auto rest = (instant - day).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", format_date(date).c_str(),
                static_cast<long long>(rest / 3600), static_cast<long long>(rest % 3600 / 60),
                static_cast<long long>(rest % 60));
  return buf;
}

std::optional<Seconds> parse_duration(std::string_view text) {
  if (text.size() < 3 || text[0] != 'P') return std::nullopt;
  std::int64_t total = 0;
  bool in_time = false;
  bool any = false;
  std::size_t pos = 1;
  while (pos < text.size()) {
    if (text[pos] == 'T') {
      if (in_time) return std::nullopt;
      in_time = true;
      ++pos;
      continue;
    }
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start || pos >= text.size()) return std::nullopt;
    std::int64_t n = 0;
    if (std::from_chars(text.data() + start, text.data() + pos, n).ec != std::errc{})
      return std::nullopt;
    char unit = text[pos++];
    std::int64_t scale = 0;
    if (!in_time && unit == 'W') scale = 7 * 86400;
    else if (!in_time && unit == 'D') scale = 86400;
    else if (in_time && unit == 'H') scale = 3600;
    else if (in_time && unit == 'M') scale = 60;
    else if (in_time && unit == 'S') scale = 1;
    else return std::nullopt;
    total += n * scale;
    any = true;
  }
  if (!any) return std::nullopt;
  return Seconds{total};
}

std::string format_duration(Seconds duration) {
  auto total = duration.count();
  if (total == 0) return "PT0S";
  std::string out = "P";
  if (total >= 86400) {
    out += std::to_string(total / 86400) + "D";
    total %= 86400;
  }
  if (total > 0) {
    out += "T";
    if (total >= 3600) out += std::to_string(total / 3600) + "H";
    if (total % 3600 >= 60) out += std::to_string(total % 3600 / 60) + "M";
    if (total % 60) out += std::to_string(total % 60) + "S";
  }
  return out;
}

}  // namespace arena
