#include "arena/timezone.hpp"

#include <map>
#include <mutex>

#include <unicode/timezone.h>
#include <unicode/unistr.h>

#include "arena/error.hpp"

namespace arena {

struct TimeZone::Impl {
  std::unique_ptr<icu::TimeZone> zone;
  mutable std::mutex mutex;
};

namespace {

std::unique_ptr<icu::TimeZone> create_zone(const std::string &name) {
  std::unique_ptr<icu::TimeZone> zone(
      icu::TimeZone::createTimeZone(icu::UnicodeString::fromUTF8(name)));
  icu::UnicodeString id;
  zone->getID(id);
  if (id == icu::UnicodeString("Etc/Unknown")) return nullptr;
  return zone;
}

}  // namespace

TimeZone TimeZone::load(const std::string &name) {
  static std::mutex cache_mutex;
  static std::map<std::string, std::shared_ptr<const Impl>, std::less<>> zones;
  std::lock_guard lock(cache_mutex);
  if (auto it = zones.find(name); it != zones.end()) return TimeZone(name, it->second);
  auto zone = create_zone(name);
  if (!zone) throw Error(Errc::UnknownTimezone, "unknown timezone '" + name + "'");
  auto impl = std::make_shared<Impl>();
  impl->zone = std::move(zone);
  zones.emplace(name, impl);
  return TimeZone(name, impl);
}

bool TimeZone::is_known(const std::string &name) {
  if (name.empty()) return false;
  try {
    load(name);
    return true;
  } catch (const Error &) {
    return false;
  }
}

std::string TimeZone::database_version() {
  UErrorCode status = U_ZERO_ERROR;
  const char *version = icu::TimeZone::getTZDataVersion(status);
  return U_SUCCESS(status) && version ? version : "unknown";
}

Seconds TimeZone::offset_at(Instant instant) const {
  UErrorCode status = U_ZERO_ERROR;
  int32_t raw = 0, dst = 0;
  {
    std::lock_guard lock(impl_->mutex);
    impl_->zone->getOffset(static_cast<UDate>(instant.time_since_epoch().count()) * 1000.0, false,
                           raw, dst, status);
  }
  if (U_FAILURE(status)) throw Error(Errc::UnknownTimezone, "offset lookup failed for " + name_);
  return Seconds{(raw + dst) / 1000};
}

LocalSeconds TimeZone::to_local(Instant instant) const {
  return LocalSeconds{instant.time_since_epoch() + offset_at(instant)};
}

Date TimeZone::local_date(Instant instant) const {
  return Date{std::chrono::floor<std::chrono::days>(to_local(instant))};
}

ResolvedInstant TimeZone::resolve(LocalSeconds local) const {
  // Offsets a day either side bracket any single transition near `local`.
  const Instant as_utc{local.time_since_epoch()};
  const Seconds before = offset_at(as_utc - std::chrono::days{1});
  const Seconds after = offset_at(as_utc + std::chrono::days{1});

  auto valid = [&](Seconds offset) { return offset_at(as_utc - offset) == offset; };
  const bool before_ok = valid(before);
  const bool after_ok = valid(after);

  if (before_ok && after_ok && before != after) {
    Instant a = as_utc - before, b = as_utc - after;
    return {std::min(a, b), LocalTimeStatus::Ambiguous};
  }
  if (before_ok) return {as_utc - before, LocalTimeStatus::Unique};
  if (after_ok) return {as_utc - after, LocalTimeStatus::Unique};

  // Gap: find the first instant carrying the post-transition offset.
  Instant lo = std::min(as_utc - before, as_utc - after);
  Instant hi = std::max(as_utc - before, as_utc - after);
  while (hi - lo > Seconds{1}) {
    Instant mid = lo + (hi - lo) / 2;
    if (offset_at(mid) == before) lo = mid;
    else hi = mid;
  }
  return {offset_at(lo) == before ? hi : lo, LocalTimeStatus::Nonexistent};
}

}  // namespace arena
