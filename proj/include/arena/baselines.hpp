#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arena/challenge.hpp"
#include "arena/observation.hpp"
#include "arena/payload.hpp"
#include "arena/temporal.hpp"

namespace arena {

enum class BaselineKind { SeasonalNaive, Persistence, ClimatologyMean };

std::string_view to_string(BaselineKind kind);
std::optional<BaselineKind> parse_baseline_kind(std::string_view text);

/// Latest-version observations for `area` with timestamps in [from, to) and
/// version_at <= as_of.
using HistoryReader =
    std::function<std::vector<Observation>(const std::string &area, Instant from, Instant to, Instant as_of)>;

/// Referee forecasters. Slots are matched by local wall-clock time of day in
/// the challenge timezone, so DST days map onto the same daily profile.
class BaselineForecaster {
 public:
  /// `season_days` is the lag SEASONAL_NAIVE prefers; the other kinds ignore it.
  explicit BaselineForecaster(BaselineKind kind, int season_days = 7, int history_days = 400);

  BaselineKind kind() const { return kind_; }

  /// A payload for `event` built only from observations published strictly
  /// before the gate closure; nullopt when no history is available yet.
  std::optional<ForecastPayload> forecast(const ChallengeSpec &spec, const ForecastEvent &event,
                                          const HistoryReader &history) const;

 private:
  BaselineKind kind_;
  int season_days_;
  int history_days_;
};

}  // namespace arena
