#include "arena/temporal.hpp"

#include "arena/log.hpp"

namespace arena {

std::string to_string(const EventRef &ref) {
  return ref.challenge_id + "/" + ref.area + "/" + format_date(ref.delivery_date);
}

Instant ForecastEvent::period_end() const {
  return target_timestamps.empty() ? gate_closure : target_timestamps.back() + resolution;
}

ResolvedInstant resolve_gate_closure(const ChallengeSpec &spec, const Date &delivery_date) {
  const auto tz = TimeZone::load(spec.reference_timezone);
  const Date submission_day = add_days(delivery_date, -spec.target_offset_days);
  const LocalSeconds wall =
      LocalSeconds{std::chrono::local_days{submission_day}.time_since_epoch()} +
      spec.deadline_local_time.since_midnight();
  return tz.resolve(wall);
}

Instant gate_closure(const ChallengeSpec &spec, const Date &delivery_date) {
  return resolve_gate_closure(spec, delivery_date).instant;
}

std::pair<Instant, Instant> local_day_bounds(const ChallengeSpec &spec, const Date &date) {
  const auto tz = TimeZone::load(spec.reference_timezone);
  auto midnight = [&](const Date &d) {
    return tz.resolve(LocalSeconds{std::chrono::local_days{d}.time_since_epoch()}).instant;
  };
  return {midnight(date), midnight(add_days(date, 1))};
}

std::vector<Instant> target_timestamps(const ChallengeSpec &spec, const Date &delivery_date) {
  const auto [start, end] = local_day_bounds(spec, delivery_date);
  std::vector<Instant> grid;
  grid.reserve(static_cast<std::size_t>((end - start) / spec.resolution) + 1);
  for (Instant t = start; t < end; t += spec.resolution) grid.push_back(t);
  return grid;
}

ForecastEvent make_event(const ChallengeSpec &spec, const std::string &area, const Date &delivery_date) {
  ForecastEvent event;
  event.ref = {spec.id, area, delivery_date};
  const auto gate = resolve_gate_closure(spec, delivery_date);
  event.gate_closure = gate.instant;
  event.gate_status = gate.status;
  event.target_timestamps = target_timestamps(spec, delivery_date);
  event.resolution = spec.resolution;
  event.tz_version = TimeZone::database_version();
  if (gate.status != LocalTimeStatus::Unique) {
    log::debug("gate_closure_resolved",
               {{"event", to_string(event.ref)},
                {"status", gate.status == LocalTimeStatus::Ambiguous ? "AMBIGUOUS_LOCAL_TIME"
                                                                     : "NONEXISTENT_LOCAL_TIME"},
                {"gate_closure", format_instant(gate.instant)}});
  }
  return event;
}

std::vector<ForecastEvent> enumerate_events(const ChallengeSpec &spec, const Date &from, const Date &to) {
  std::vector<ForecastEvent> events;
  for (Date d = from; std::chrono::sys_days{d} <= std::chrono::sys_days{to}; d = add_days(d, 1))
    for (const auto &area : spec.areas) events.push_back(make_event(spec, area, d));
  return events;
}

Date next_open_delivery(const ChallengeSpec &spec, Instant now) {
  const auto tz = TimeZone::load(spec.reference_timezone);
  Date d = add_days(tz.local_date(now), spec.target_offset_days - 1);
  while (gate_closure(spec, d) <= now) d = add_days(d, 1);
  return d;
}

}  // namespace arena
