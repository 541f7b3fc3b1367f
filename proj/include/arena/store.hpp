#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "arena/observation.hpp"
#include "arena/scoring.hpp"
#include "arena/temporal.hpp"
#include "arena/time.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace arena {

enum class DataRegime { PublicOnly, Proprietary, Undeclared };

std::string_view to_string(DataRegime regime);
std::optional<DataRegime> parse_data_regime(std::string_view text);

struct Participant {
  std::string id;
  std::string display_name;
  std::optional<std::string> method_description;
  std::optional<std::string> repo_or_service_link;
  DataRegime data_regime = DataRegime::Undeclared;
  bool forecasts_public = false;

  bool has_method_info() const { return method_description.has_value() || repo_or_service_link.has_value(); }
  bool operator==(const Participant &) const = default;
};

struct ApiKeyRecord {
  std::string key_id;
  std::string participant_id;
  std::string salt_hex;
  std::string secret_hash_hex;
  Instant created_at;
  std::optional<Instant> revoked_at;
};

struct StoredSubmission {
  std::int64_t id = 0;
  std::string participant_id;
  EventRef event;
  /// Canonical JSON of the grid-aligned payload, byte-stable once written.
  std::string payload_json;
  Instant received_at;
};

/// One scoring pass over an event at a specific ground-truth version.
struct EventScoring {
  EventRef event;
  std::string version_id;
  Instant latest_version_at;
  Instant scored_at;
  int slots = 0;
};

struct IngestStatus {
  EventRef event;
  int attempts = 0;
  std::optional<Instant> next_attempt_at;
  std::optional<Instant> last_failure_at;
  std::string last_error;
  bool stale = false;
  double completeness = 0.0;
};

/// Append-only persistent state. All methods are safe to call concurrently;
/// calls are serialized on one connection.
class Store {
 public:
  /// `path` may be ":memory:". Throws Error(Store) when the file cannot be opened.
  static std::unique_ptr<Store> open(const std::string &path);
  ~Store();
  Store(const Store &) = delete;
  Store &operator=(const Store &) = delete;

  /// Runs `fn` inside one transaction; rolls back if it throws.
  void transaction(const std::function<void()> &fn);

  // participants
  void insert_participant(const Participant &p);
  void update_participant(const Participant &p);
  std::optional<Participant> find_participant(const std::string &id) const;
  std::optional<Participant> find_participant_by_name(const std::string &display_name) const;
  std::vector<Participant> participants() const;

  // api keys
  void insert_key(const ApiKeyRecord &key);
  std::optional<ApiKeyRecord> find_key(const std::string &key_id) const;
  std::vector<ApiKeyRecord> keys_of(const std::string &participant_id) const;
  void set_key_revoked(const std::string &key_id, Instant at);

  // submissions
  std::int64_t append_submission(const std::string &participant_id, const EventRef &event,
                                 const std::string &payload_json, Instant received_at);
  std::optional<StoredSubmission> submission(std::int64_t id) const;
  /// All submissions for one participant and event, in insertion order.
  std::vector<StoredSubmission> submissions_for(const std::string &participant_id, const EventRef &event) const;
  /// Greatest received_at strictly before `gate`, ties broken by greater id.
  std::optional<StoredSubmission> effective_submission(const std::string &participant_id, const EventRef &event,
                                                       Instant gate) const;
  std::vector<std::string> submitters(const EventRef &event) const;
  std::vector<StoredSubmission> all_submissions() const;
  std::optional<Date> earliest_submission_date(const std::string &challenge_id) const;

  // observations
  std::optional<Observation> latest_observation(const std::string &source, const std::string &area,
                                                Instant timestamp) const;
  void insert_observation(const Observation &obs);
  /// Latest version per timestamp in [from, to) with version_at <= as_of.
  std::vector<Observation> observations(const std::string &source, const std::string &area, Instant from,
                                        Instant to, Instant as_of) const;
  std::int64_t observation_version_count() const;

  // scoring state
  void append_event_scoring(const EventScoring &scoring);
  std::optional<EventScoring> latest_event_scoring(const EventRef &event,
                                                   std::optional<Instant> as_of = std::nullopt) const;
  /// Latest scoring per delivery date with scored_at <= as_of, newest date first.
  std::vector<EventScoring> scored_events(const std::string &challenge_id, const std::string &area,
                                          Instant as_of) const;

  /// Idempotent upsert keyed by (participant, event, metric, ground_truth_version).
  bool insert_score(const ScoreRecord &record);
  std::vector<ScoreRecord> scores_for(const EventRef &event, const std::string &ground_truth_version) const;
  std::vector<ScoreRecord> all_scores() const;
  /// Bumped on every new ScoreRecord; leaderboard caches key on it.
  std::uint64_t score_generation() const;

  // ingest bookkeeping
  std::optional<IngestStatus> ingest_status(const EventRef &event) const;
  void put_ingest_status(const IngestStatus &status);
  std::vector<IngestStatus> ingest_statuses() const;

 private:
  explicit Store(sqlite3 *db);
  void exec(const char *sql) const;
  sqlite3_stmt *prepare(const char *sql) const;

  sqlite3 *db_;
  mutable std::map<std::string, sqlite3_stmt *> statements_;
  mutable std::recursive_mutex mutex_;
  std::uint64_t generation_ = 0;
};

}  // namespace arena
