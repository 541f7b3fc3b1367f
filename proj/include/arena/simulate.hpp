#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arena/baselines.hpp"
#include "arena/leaderboard.hpp"
#include "arena/pipeline.hpp"
#include "arena/store.hpp"

namespace arena {

struct SimulationConfig {
  /// Delivery days forecast by the baselines; ground truth starts one day earlier.
  int days = 30;
  std::uint64_t seed = 1;
  std::vector<BaselineKind> baselines{BaselineKind::SeasonalNaive, BaselineKind::Persistence,
                                      BaselineKind::ClimatologyMean};
  /// Phase advance of the synthetic truth per day, radians.
  double drift = 0.0;
  /// Lag in days SEASONAL_NAIVE copies from when available.
  int season_days = 7;
  /// First day of synthetic truth.
  Date start{std::chrono::year{2025}, std::chrono::month{6}, std::chrono::day{2}};
  std::string store_path = ":memory:";
};

/// Per-area synthetic truth y = A sin(2 pi h / 24 + drift k) + offset with h
/// the local hour of day and k the day index since the start.
struct SyntheticArea {
  std::string area;
  double amplitude = 0.0;
  double offset = 0.0;
};

std::vector<SyntheticArea> synthesize_areas(const ChallengeSpec &spec, std::uint64_t seed);
double synthetic_value(const SyntheticArea &area, double local_hour, int day_index, double drift);

struct SimulationResult {
  std::vector<SyntheticArea> areas;
  /// One page per (area, window), windows longer than the run left out.
  std::vector<LeaderboardPage> leaderboards;
  std::vector<TickReport> ticks;
  /// Participant id per baseline, in configuration order.
  std::vector<std::string> participant_ids;
  Instant final_as_of;
  std::unique_ptr<Store> store;
  std::unique_ptr<RegistryHandle> registry;

  /// All pages as CSV blocks, each preceded by a `# area window` line.
  std::string leaderboard_csv() const;
  nlohmann::json to_json() const;
};

/// Runs the real gateway, ingest, scoring and leaderboard code on a virtual
/// clock. Deterministic for a given spec and config.
SimulationResult simulate(const ChallengeSpec &spec, const SimulationConfig &config);

}  // namespace arena
