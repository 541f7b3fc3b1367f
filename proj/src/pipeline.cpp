#include "arena/pipeline.hpp"

#include "arena/log.hpp"

namespace arena {

nlohmann::json TickReport::to_json() const {
  return {{"as_of", format_instant(as_of)},
          {"events_ingested", events_ingested},
          {"events_scored", events_scored},
          {"events_rescored", events_rescored},
          {"stale_events", stale_events},
          {"duration_ms", static_cast<double>(duration.count()) / 1000.0}};
}

Pipeline::Pipeline(const RegistryHandle &registry, Store &store, Gateway &gateway, Ingestor &ingest)
    : registry_(registry), store_(store), gateway_(gateway), ingest_(ingest) {}

TickReport Pipeline::tick(Instant as_of) {
  std::lock_guard lock(tick_mutex_);
  const auto started = std::chrono::steady_clock::now();
  TickReport report;
  report.as_of = as_of;
  auto registry = registry_.get();
  for (const auto &spec : registry->specs()) tick_challenge(spec, as_of, report);
  report.duration =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
  log::info("tick", report.to_json());
  return report;
}

void Pipeline::tick_challenge(const ChallengeSpec &spec, Instant as_of, TickReport &report) {
  const auto first = store_.earliest_submission_date(spec.id);
  if (!first) return;
  const auto tz = TimeZone::load(spec.reference_timezone);
  const Date last = tz.local_date(as_of);

  for (Date d = *first; days_between(d, last) >= 0; d = add_days(d, 1)) {
    for (const auto &area : spec.areas) {
      const ForecastEvent event = make_event(spec, area, d);
      if (event.period_end() > as_of) continue;
      const auto latest = store_.latest_event_scoring(event.ref);
      // History after as_of is already written; an older tick must not rewrite it.
      if (latest && latest->scored_at > as_of) continue;
      const Instant horizon = ingest_.freeze_end(event);
      if (latest && latest->scored_at >= horizon) continue;

      const auto outcome = ingest_.ingest(event, as_of);
      if (outcome.new_versions > 0) ++report.events_ingested;
      if (outcome.became_stale) ++report.stale_events;

      GroundTruthView truth = ingest_.view(event, std::min(as_of, horizon));
      if (!truth.complete() && !latest && as_of > horizon) truth = ingest_.view(event, as_of);
      if (!truth.complete()) continue;
      if (latest && latest->version_id == truth.version_id) continue;

      const auto forecasts = gateway_.effective_forecasts(event);
      const auto scores = score_event(spec, event, forecasts, truth, as_of);
      store_.transaction([&] {
        for (const auto &record : scores.records) store_.insert_score(record);
        store_.append_event_scoring({event.ref, truth.version_id, truth.latest_version_at, as_of,
                                     static_cast<int>(event.target_timestamps.size())});
      });
      const int pairs = static_cast<int>(forecasts.size());
      if (latest) report.events_rescored += pairs;
      else report.events_scored += pairs;
      log::info(latest ? "event_rescored" : "event_scored",
                {{"event", to_string(event.ref)}, {"version", truth.version_id}, {"forecasts", pairs}});
    }
  }
}

}  // namespace arena
