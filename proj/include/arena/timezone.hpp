#pragma once

#include <memory>
#include <string>

#include "arena/time.hpp"

namespace arena {

/// How a wall-clock time mapped onto the UTC timeline.
enum class LocalTimeStatus {
  Unique,
  /// Occurs twice (fall-back); resolved to the earlier, pre-transition offset.
  Ambiguous,
  /// Skipped (spring-forward); resolved to the end of the transition.
  Nonexistent,
};

struct ResolvedInstant {
  Instant instant;
  LocalTimeStatus status = LocalTimeStatus::Unique;
};

/// IANA zone backed by the ICU tz database. Cheap to copy; immutable.
class TimeZone {
 public:
  /// Throws Error(UnknownTimezone) for names the tz database does not know.
  static TimeZone load(const std::string &name);
  static bool is_known(const std::string &name);
  /// Version string of the tz database in use, e.g. "2025b".
  static std::string database_version();

  const std::string &name() const { return name_; }

  /// Total UTC offset in effect at `instant`.
  Seconds offset_at(Instant instant) const;
  LocalSeconds to_local(Instant instant) const;
  ResolvedInstant resolve(LocalSeconds local) const;

  Date local_date(Instant instant) const;

 private:
  struct Impl;
  TimeZone(std::string name, std::shared_ptr<const Impl> impl)
      : name_(std::move(name)), impl_(std::move(impl)) {}

  std::string name_;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace arena
