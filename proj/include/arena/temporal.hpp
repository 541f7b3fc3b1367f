#pragma once

#include <string>
#include <vector>

#include "arena/challenge.hpp"
#include "arena/time.hpp"
#include "arena/timezone.hpp"

namespace arena {

/// Identifies one submission round for one area.
struct EventRef {
  std::string challenge_id;
  std::string area;
  Date delivery_date;

  auto operator<=>(const EventRef &) const = default;
};

std::string to_string(const EventRef &ref);

struct ForecastEvent {
  EventRef ref;
  Instant gate_closure;
  /// Start-of-interval UTC instants covering the local delivery day.
  std::vector<Instant> target_timestamps;
  Seconds resolution{3600};

  // audit metadata
  std::string tz_version;
  LocalTimeStatus gate_status = LocalTimeStatus::Unique;

  const std::string &challenge_id() const { return ref.challenge_id; }
  const std::string &area() const { return ref.area; }
  const Date &delivery_date() const { return ref.delivery_date; }
  /// End of the delivery period (exclusive).
  Instant period_end() const;
};

/// Gate-closure instant with how its wall-clock deadline was resolved.
ResolvedInstant resolve_gate_closure(const ChallengeSpec &spec, const Date &delivery_date);
Instant gate_closure(const ChallengeSpec &spec, const Date &delivery_date);

/// UTC instants of local midnight starting `date` and the next local midnight.
std::pair<Instant, Instant> local_day_bounds(const ChallengeSpec &spec, const Date &date);

std::vector<Instant> target_timestamps(const ChallengeSpec &spec, const Date &delivery_date);

ForecastEvent make_event(const ChallengeSpec &spec, const std::string &area, const Date &delivery_date);

/// One event per (delivery day in [from, to], area), by date then area order.
std::vector<ForecastEvent> enumerate_events(const ChallengeSpec &spec, const Date &from, const Date &to);

/// Submissions are accepted strictly before gate closure.
inline bool is_open(const ForecastEvent &event, Instant now) { return now < event.gate_closure; }

/// The earliest delivery date whose gate is still open at `now`.
Date next_open_delivery(const ChallengeSpec &spec, Instant now);

}  // namespace arena
