#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/challenge.hpp"
#include "arena/store.hpp"

namespace arena {

class Ingestor;

/// The last N fully scored delivery periods at `as_of`.
struct LeaderboardWindow {
  std::string challenge_id;
  std::string area;
  int n = 0;
  Instant as_of;
  /// Newest first; at most `n` entries.
  std::vector<EventScoring> events;

  std::vector<Date> delivery_dates() const;
};

struct LeaderboardRow {
  std::string participant_id;
  std::string display_name;
  /// Full-precision pooled value per metric key; absent when the participant
  /// lacks a record for a covered event.
  std::map<std::string, std::optional<double>> metrics;
  double coverage = 0.0;
  /// nullopt means UNRANKED.
  std::optional<int> rank;
  DataRegime data_regime = DataRegime::Undeclared;
  bool has_method_info = false;
  bool forecasts_public = false;
};

struct LeaderboardQuery {
  std::string challenge_id;
  std::string area;
  int window = 0;
  Instant as_of;
  std::optional<DataRegime> data_regime;
  /// Metric key; the challenge's first metric when empty.
  std::string sort_metric;
};

struct LeaderboardPage {
  LeaderboardQuery query;
  std::vector<Date> delivery_dates;
  std::vector<std::string> metric_keys;
  std::vector<LeaderboardRow> rows;
};

/// Display precision: four decimals, half away from zero.
double round_display(double value);

/// Ranked rows first, ascending on `sort_metric` with competition ranking
/// and ties listed by participant id; the rest UNRANKED by coverage.
std::vector<LeaderboardRow> rank_rows(std::vector<LeaderboardRow> rows, const std::string &sort_metric);

nlohmann::json row_to_json(const LeaderboardRow &row, const std::vector<std::string> &metric_keys);
nlohmann::json page_to_json(const LeaderboardPage &page);
/// One line per JSON row, same fields and values.
std::string page_to_csv(const LeaderboardPage &page);

class Leaderboard {
 public:
  Leaderboard(const RegistryHandle &registry, const Store &store);

  LeaderboardWindow window(const std::string &challenge_id, const std::string &area, int n, Instant as_of) const;

  /// Pooled over every target timestamp of every window event. Throws
  /// UNSCORED_EVENT when an event of the window has no scoring at as_of.
  std::map<std::string, double> aggregate(const LeaderboardWindow &window, const MetricSpec &metric) const;

  LeaderboardPage query(const LeaderboardQuery &query) const;

  /// Forecast trajectories of public participants plus ground truth.
  nlohmann::json series(const Ingestor &ingest, const std::string &challenge_id, const std::string &area,
                        const std::vector<std::string> &participants, const Date &from, const Date &to,
                        Instant as_of) const;

 private:
  LeaderboardPage compute(const LeaderboardQuery &query, const ChallengeSpec &spec) const;

  const RegistryHandle &registry_;
  const Store &store_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::pair<std::uint64_t, LeaderboardPage>> cache_;
};

}  // namespace arena
