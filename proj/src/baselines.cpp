#include "arena/baselines.hpp"

#include <algorithm>
#include <map>

#include "arena/timezone.hpp"

namespace arena {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::SeasonalNaive: return "SEASONAL_NAIVE";
    case BaselineKind::Persistence: return "PERSISTENCE";
    case BaselineKind::ClimatologyMean: return "CLIMATOLOGY_MEAN";
  }
  return "SEASONAL_NAIVE";
}

std::optional<BaselineKind> parse_baseline_kind(std::string_view text) {
  for (auto k : {BaselineKind::SeasonalNaive, BaselineKind::Persistence, BaselineKind::ClimatologyMean})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

namespace {

using Days = std::chrono::days;

struct SlotKey {
  std::chrono::local_days day;
  Seconds time_of_day;
};

SlotKey slot_key(const TimeZone &tz, Instant t) {
  const auto local = tz.to_local(t);
  const auto day = std::chrono::floor<Days>(local);
  return {day, local - day};
}

/// value per local day, per time of day; a repeated fall-back hour keeps the
/// later reading.
using History = std::map<Seconds, std::map<std::chrono::local_days, double>>;

}  // namespace

BaselineForecaster::BaselineForecaster(BaselineKind kind, int season_days, int history_days)
    : kind_(kind), season_days_(season_days), history_days_(history_days) {}

std::optional<ForecastPayload> BaselineForecaster::forecast(const ChallengeSpec &spec, const ForecastEvent &event,
                                                            const HistoryReader &history) const {
  const auto tz = TimeZone::load(spec.reference_timezone);
  const Instant as_of = event.gate_closure - Seconds{1};
  const auto rows = history(event.area(), event.gate_closure - Days{history_days_}, event.gate_closure, as_of);

  History by_slot;
  std::map<std::chrono::local_days, int> per_day;
  double sum = 0.0;
  for (const auto &o : rows) {
    if (o.version_at >= event.gate_closure) continue;
    const auto key = slot_key(tz, o.timestamp);
    by_slot[key.time_of_day][key.day] = o.value;
    ++per_day[key.day];
    sum += o.value;
  }
  if (rows.empty()) return std::nullopt;
  const double overall_mean = sum / static_cast<double>(rows.size());

  // Most recent local day with every slot of its own grid observed.
  std::optional<std::chrono::local_days> complete_day;
  for (auto it = per_day.rbegin(); it != per_day.rend(); ++it) {
    const Date d{it->first};
    if (it->second == static_cast<int>(target_timestamps(spec, d).size())) {
      complete_day = it->first;
      break;
    }
  }

  auto most_recent = [&](Seconds tod) -> std::optional<double> {
    auto it = by_slot.find(tod);
    if (it == by_slot.end() || it->second.empty()) return std::nullopt;
    return it->second.rbegin()->second;
  };

  std::vector<double> values;
  values.reserve(event.target_timestamps.size());
  for (const Instant t : event.target_timestamps) {
    const auto key = slot_key(tz, t);
    std::optional<double> v;
    switch (kind_) {
      case BaselineKind::SeasonalNaive: {
        auto it = by_slot.find(key.time_of_day);
        if (it != by_slot.end()) {
          auto season = it->second.find(key.day - Days{season_days_});
          if (season != it->second.end()) v = season->second;
        }
        if (!v) v = most_recent(key.time_of_day);
        break;
      }
      case BaselineKind::Persistence: {
        if (complete_day) {
          auto it = by_slot.find(key.time_of_day);
          if (it != by_slot.end()) {
            auto day = it->second.find(*complete_day);
            if (day != it->second.end()) v = day->second;
          }
        }
        if (!v) v = most_recent(key.time_of_day);
        break;
      }
      case BaselineKind::ClimatologyMean: {
        auto it = by_slot.find(key.time_of_day);
        if (it != by_slot.end() && !it->second.empty()) {
          double s = 0.0;
          for (const auto &[day, value] : it->second) s += value;
          v = s / static_cast<double>(it->second.size());
        }
        break;
      }
    }
    values.push_back(std::clamp(v.value_or(overall_mean), spec.value_range.min, spec.value_range.max));
  }

  ForecastPayload payload;
  if (spec.allows(PayloadKind::Point)) payload.point = values;
  if (spec.allows(PayloadKind::Quantile))
    payload.quantiles = ForecastPayload::QuantileBlock{
        spec.quantile_levels, std::vector<std::vector<double>>(spec.quantile_levels.size(), values)};
  if (spec.allows(PayloadKind::Ensemble)) payload.ensemble = std::vector<std::vector<double>>{values};
  return payload;
}

}  // namespace arena
