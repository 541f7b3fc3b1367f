#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>

#include "arena/baselines.hpp"
#include "arena/challenge.hpp"
#include "arena/export.hpp"
#include "arena/gateway.hpp"
#include "arena/ingest.hpp"
#include "arena/leaderboard.hpp"
#include "arena/log.hpp"
#include "arena/pipeline.hpp"
#include "arena/scoring.hpp"
#include "arena/simulate.hpp"
#include "arena/store.hpp"
#include "arena/temporal.hpp"

namespace arena::testing {

inline Instant at(const std::string &text) { return *parse_instant(text); }
inline Date day(const std::string &text) { return *parse_date(text); }

/// Hourly Europe/Berlin challenge, gate 12:00 the day before, all payload kinds.
inline ChallengeSpec berlin_spec(std::vector<MetricSpec> metrics = {{MetricName::MAE}, {MetricName::RMSE}}) {
  ChallengeSpec s;
  s.id = "load";
  s.title = "Load";
  s.target_variable = "load";
  s.areas = {"DE", "FR"};
  s.reference_timezone = "Europe/Berlin";
  s.deadline_local_time = {12, 0};
  s.resolution = Seconds{3600};
  s.payload_kinds = {PayloadKind::Point, PayloadKind::Quantile, PayloadKind::Ensemble};
  s.quantile_levels = {0.1, 0.5, 0.9};
  s.max_ensemble_members = 20;
  s.value_range = {-1e6, 1e6};
  s.metrics = std::move(metrics);
  s.windows = {1, 7, 30};
  s.ground_truth_source = {SourceKind::FileFixture, "truth.csv", Seconds{0}};
  return s;
}

/// Silences structured logs for the lifetime of the guard.
class QuietLogs {
 public:
  QuietLogs() : previous_(log::set_sink([](const nlohmann::json &) {})) {}
  ~QuietLogs() { log::set_sink(previous_); }

 private:
  log::Sink previous_;
};

/// Every component wired to one in-memory store and a settable clock.
struct World {
  explicit World(ChallengeSpec spec_in)
      : spec(std::move(spec_in)),
        registry(Registry({spec})),
        store(Store::open(":memory:")),
        gateway(registry, *store, [this] { return now; }),
        ingest(registry, *store),
        pipeline(registry, *store, gateway, ingest),
        leaderboard(registry, *store),
        source(std::make_shared<SeriesSource>()) {
    ingest.set_source(spec.ground_truth_source.identity(), source);
  }

  ForecastEvent event(const std::string &area, const Date &d) const { return make_event(spec, area, d); }

  /// Truth for a whole event grid, published at `available_at` or per slot end.
  void publish(const ForecastEvent &e, const std::function<double(std::size_t)> &value,
               std::optional<Instant> available_at = std::nullopt) {
    for (std::size_t k = 0; k < e.target_timestamps.size(); ++k)
      source->add({e.area(), e.target_timestamps[k], value(k), available_at});
  }

  std::string participant(const std::string &name) { return gateway.register_participant(name, name).id; }

  ChallengeSpec spec;
  RegistryHandle registry;
  std::unique_ptr<Store> store;
  Instant now{};
  Gateway gateway;
  Ingestor ingest;
  Pipeline pipeline;
  Leaderboard leaderboard;
  std::shared_ptr<SeriesSource> source;
};

inline ForecastPayload point_payload(std::vector<double> values) {
  ForecastPayload p;
  p.point = std::move(values);
  return p;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("arena-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace arena::testing
