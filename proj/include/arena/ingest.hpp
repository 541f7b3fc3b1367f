#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "arena/challenge.hpp"
#include "arena/observation.hpp"
#include "arena/store.hpp"
#include "arena/temporal.hpp"

namespace arena {

/// One row as the source reports it.
struct RawObservation {
  std::string area;
  Instant timestamp;
  double value = 0.0;
  /// Publication instant declared by the source, if any.
  std::optional<Instant> available_at;
};

class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  /// Rows for `area` with timestamps in [from, to).
  virtual std::vector<RawObservation> fetch(const std::string &area, Instant from, Instant to) = 0;
  /// Replayable sources publish rows at fixed instants; the others are
  /// versioned at ingestion time.
  virtual bool replayable() const = 0;
};

/// Parses `area,timestamp_utc,value[,available_at]` lines. Throws PARSE when
/// more than 5% of the data lines are malformed.
std::vector<RawObservation> parse_observation_csv(std::string_view text, const std::string &origin);

/// CSV file read once and served from memory.
class FixtureSource : public ObservationSource {
 public:
  explicit FixtureSource(std::filesystem::path path);
  std::vector<RawObservation> fetch(const std::string &area, Instant from, Instant to) override;
  bool replayable() const override { return true; }

 private:
  std::filesystem::path path_;
  std::optional<std::vector<RawObservation>> rows_;
  std::mutex mutex_;
};

/// GET on a URL template with `{area}`, `{from}`, `{to}` placeholders; the
/// body is CSV in the fixture shape. Plain http only.
class HttpSource : public ObservationSource {
 public:
  explicit HttpSource(std::string url_template);
  std::vector<RawObservation> fetch(const std::string &area, Instant from, Instant to) override;
  bool replayable() const override { return false; }

 private:
  std::string template_;
};

/// In-memory rows; used by the simulator and tests.
class SeriesSource : public ObservationSource {
 public:
  void add(RawObservation row);
  std::vector<RawObservation> fetch(const std::string &area, Instant from, Instant to) override;
  bool replayable() const override { return true; }

 private:
  std::vector<RawObservation> rows_;
  std::mutex mutex_;
};

struct FetchResult {
  std::vector<Observation> observations;
  int dropped_non_finite = 0;
  int dropped_off_grid = 0;
  /// Rows whose publication instant is still in the future.
  int unpublished = 0;
};

struct IngestOutcome {
  int new_versions = 0;
  bool attempted = false;
  bool failed = false;
  bool became_stale = false;
  double completeness = 0.0;
};

inline constexpr double kRevisionThreshold = 1e-9;
inline constexpr auto kStaleAfter = std::chrono::hours{72};
inline constexpr auto kMaxBackoff = std::chrono::minutes{60};

/// Backoff before retry number `attempts + 1`: 1, 2, 4, ... minutes, capped.
Seconds retry_delay(int attempts);

/// Deterministic digest of a (timestamp -> version_at) map.
std::string ground_truth_version_id(const std::vector<Observation> &observations);

class Ingestor {
 public:
  Ingestor(const RegistryHandle &registry, Store &store);

  /// Replaces the source a SourceRef identity resolves to.
  void set_source(const std::string &identity, std::shared_ptr<ObservationSource> source);
  std::shared_ptr<ObservationSource> source_for(const ChallengeSpec &spec);

  /// Rows on the event grid that are published by `now`, versioned. HTTP
  /// sources are not queried before the period end plus publication lag.
  FetchResult fetch(const ForecastEvent &event, Instant now);

  /// Writes a version only where the value moves by more than 1e-9 from the
  /// current latest one. Returns the number of versions written.
  int upsert(const std::vector<Observation> &observations);

  GroundTruthView view(const ForecastEvent &event, Instant as_of) const;
  /// View used for scoring: revisions after the freeze horizon are invisible.
  GroundTruthView scoring_view(const ForecastEvent &event, Instant as_of) const;
  Instant freeze_end(const ForecastEvent &event) const;

  /// Scored events whose frozen-horizon ground truth differs from the version
  /// they were last scored on.
  std::vector<ForecastEvent> rescore_candidates(Instant as_of) const;

  /// fetch + upsert with retry bookkeeping for unavailable sources.
  IngestOutcome ingest(const ForecastEvent &event, Instant now);

 private:
  const ChallengeSpec &spec_for(const ForecastEvent &event, const Registry &registry) const;

  const RegistryHandle &registry_;
  Store &store_;
  std::map<std::string, std::shared_ptr<ObservationSource>> sources_;
  mutable std::mutex mutex_;
};

}  // namespace arena
