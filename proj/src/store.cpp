#include "arena/store.hpp"

#include <sqlite3.h>

#include "arena/error.hpp"

namespace arena {

std::string_view to_string(DataRegime regime) {
  switch (regime) {
    case DataRegime::PublicOnly: return "PUBLIC_ONLY";
    case DataRegime::Proprietary: return "PROPRIETARY";
    case DataRegime::Undeclared: return "UNDECLARED";
  }
  return "UNDECLARED";
}

std::optional<DataRegime> parse_data_regime(std::string_view text) {
  for (auto r : {DataRegime::PublicOnly, DataRegime::Proprietary, DataRegime::Undeclared})
    if (to_string(r) == text) return r;
  return std::nullopt;
}

namespace {

const char *kSchema = R"sql(
PRAGMA foreign_keys = ON;
CREATE TABLE IF NOT EXISTS participants (
  id TEXT PRIMARY KEY,
  display_name TEXT NOT NULL UNIQUE,
  method_description TEXT,
  repo_or_service_link TEXT,
  data_regime TEXT NOT NULL DEFAULT 'UNDECLARED',
  forecasts_public INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS api_keys (
  key_id TEXT PRIMARY KEY,
  participant_id TEXT NOT NULL REFERENCES participants(id),
  salt TEXT NOT NULL,
  secret_hash TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  revoked_at INTEGER
);
CREATE TABLE IF NOT EXISTS submissions (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  participant_id TEXT NOT NULL REFERENCES participants(id),
  challenge_id TEXT NOT NULL,
  area TEXT NOT NULL,
  delivery_date TEXT NOT NULL,
  payload TEXT NOT NULL,
  received_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS submissions_by_event
  ON submissions(challenge_id, area, delivery_date, participant_id, received_at);
CREATE TRIGGER IF NOT EXISTS submissions_immutable BEFORE UPDATE ON submissions
  BEGIN SELECT RAISE(ABORT, 'submissions are immutable'); END;
CREATE TRIGGER IF NOT EXISTS submissions_append_only BEFORE DELETE ON submissions
  BEGIN SELECT RAISE(ABORT, 'submissions are append-only'); END;
CREATE TABLE IF NOT EXISTS observations (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  source TEXT NOT NULL,
  area TEXT NOT NULL,
  ts INTEGER NOT NULL,
  value REAL NOT NULL,
  version_at INTEGER NOT NULL,
  UNIQUE(source, area, ts, version_at)
);
CREATE TRIGGER IF NOT EXISTS observations_immutable BEFORE UPDATE ON observations
  BEGIN SELECT RAISE(ABORT, 'observation versions are immutable'); END;
CREATE TRIGGER IF NOT EXISTS observations_append_only BEFORE DELETE ON observations
  BEGIN SELECT RAISE(ABORT, 'observation versions are append-only'); END;
CREATE TABLE IF NOT EXISTS event_scorings (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  challenge_id TEXT NOT NULL,
  area TEXT NOT NULL,
  delivery_date TEXT NOT NULL,
  version_id TEXT NOT NULL,
  latest_version_at INTEGER NOT NULL,
  scored_at INTEGER NOT NULL,
  slots INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS event_scorings_by_event
  ON event_scorings(challenge_id, area, delivery_date, scored_at);
CREATE TABLE IF NOT EXISTS scores (
  participant_id TEXT NOT NULL,
  challenge_id TEXT NOT NULL,
  area TEXT NOT NULL,
  delivery_date TEXT NOT NULL,
  metric TEXT NOT NULL,
  value REAL NOT NULL,
  total REAL NOT NULL,
  slots INTEGER NOT NULL,
  ground_truth_version TEXT NOT NULL,
  scored_at INTEGER NOT NULL,
  PRIMARY KEY (participant_id, challenge_id, area, delivery_date, metric, ground_truth_version)
);
CREATE INDEX IF NOT EXISTS scores_by_event ON scores(challenge_id, area, delivery_date, ground_truth_version);
CREATE TABLE IF NOT EXISTS ingest_status (
  challenge_id TEXT NOT NULL,
  area TEXT NOT NULL,
  delivery_date TEXT NOT NULL,
  attempts INTEGER NOT NULL,
  next_attempt_at INTEGER,
  last_failure_at INTEGER,
  last_error TEXT NOT NULL,
  stale INTEGER NOT NULL,
  completeness REAL NOT NULL,
  PRIMARY KEY (challenge_id, area, delivery_date)
);
)sql";

/// Borrowed, reset-on-destruction view of a cached prepared statement.
class Stmt {
 public:
  Stmt(sqlite3 *db, sqlite3_stmt *stmt) : db_(db), stmt_(stmt) {}
  ~Stmt() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }
  Stmt(const Stmt &) = delete;

  Stmt &bind(int i, const std::string &v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt &bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Stmt &bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
  Stmt &bind(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }
  Stmt &bind(int i, Instant v) { return bind(i, static_cast<std::int64_t>(v.time_since_epoch().count())); }
  Stmt &bind(int i, const Date &d) { return bind(i, format_date(d)); }
  Stmt &bind_null(int i) {
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }
  template <typename T>
  Stmt &bind(int i, const std::optional<T> &v) {
    return v ? bind(i, *v) : bind_null(i);
  }

  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(Errc::Store, sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }

  bool is_null(int c) const { return sqlite3_column_type(stmt_, c) == SQLITE_NULL; }
  std::string text(int c) const {
    auto *p = reinterpret_cast<const char *>(sqlite3_column_text(stmt_, c));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, c))) : std::string();
  }
  std::int64_t int64(int c) const { return sqlite3_column_int64(stmt_, c); }
  double real(int c) const { return sqlite3_column_double(stmt_, c); }
  Instant instant(int c) const { return Instant{Seconds{int64(c)}}; }
  std::optional<Instant> opt_instant(int c) const {
    return is_null(c) ? std::nullopt : std::optional<Instant>(instant(c));
  }
  std::optional<std::string> opt_text(int c) const {
    return is_null(c) ? std::nullopt : std::optional<std::string>(text(c));
  }
  Date date(int c) const {
    auto d = parse_date(text(c));
    if (!d) throw Error(Errc::Store, "corrupt date column");
    return *d;
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw Error(Errc::Store, sqlite3_errmsg(db_));
  }
  sqlite3 *db_;
  sqlite3_stmt *stmt_;
};

Participant read_participant(const Stmt &s) {
  Participant p;
  p.id = s.text(0);
  p.display_name = s.text(1);
  p.method_description = s.opt_text(2);
  p.repo_or_service_link = s.opt_text(3);
  p.data_regime = parse_data_regime(s.text(4)).value_or(DataRegime::Undeclared);
  p.forecasts_public = s.int64(5) != 0;
  return p;
}

ApiKeyRecord read_key(const Stmt &s) {
  return {s.text(0), s.text(1), s.text(2), s.text(3), s.instant(4), s.opt_instant(5)};
}

StoredSubmission read_submission(const Stmt &s) {
  StoredSubmission sub;
  sub.id = s.int64(0);
  sub.participant_id = s.text(1);
  sub.event = {s.text(2), s.text(3), s.date(4)};
  sub.payload_json = s.text(5);
  sub.received_at = s.instant(6);
  return sub;
}

ScoreRecord read_score(const Stmt &s) {
  ScoreRecord r;
  r.participant_id = s.text(0);
  r.event = {s.text(1), s.text(2), s.date(3)};
  r.metric = s.text(4);
  r.value = s.real(5);
  r.total = s.real(6);
  r.slots = static_cast<int>(s.int64(7));
  r.ground_truth_version = s.text(8);
  r.scored_at = s.instant(9);
  return r;
}

EventScoring read_scoring(const Stmt &s) {
  return {{s.text(0), s.text(1), s.date(2)}, s.text(3), s.instant(4), s.instant(5), static_cast<int>(s.int64(6))};
}

IngestStatus read_ingest(const Stmt &s) {
  IngestStatus st;
  st.event = {s.text(0), s.text(1), s.date(2)};
  st.attempts = static_cast<int>(s.int64(3));
  st.next_attempt_at = s.opt_instant(4);
  st.last_failure_at = s.opt_instant(5);
  st.last_error = s.text(6);
  st.stale = s.int64(7) != 0;
  st.completeness = s.real(8);
  return st;
}

constexpr const char *kSubmissionCols =
    "SELECT id, participant_id, challenge_id, area, delivery_date, payload, received_at FROM submissions ";
constexpr const char *kScoreCols =
    "SELECT participant_id, challenge_id, area, delivery_date, metric, value, total, slots, "
    "ground_truth_version, scored_at FROM scores ";
constexpr const char *kParticipantCols =
    "SELECT id, display_name, method_description, repo_or_service_link, data_regime, forecasts_public "
    "FROM participants ";

}  // namespace

Store::Store(sqlite3 *db) : db_(db) {}

Store::~Store() {
  for (auto &[_, stmt] : statements_) sqlite3_finalize(stmt);
  sqlite3_close(db_);
}

std::unique_ptr<Store> Store::open(const std::string &path) {
  sqlite3 *db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
                           nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(Errc::Store, "cannot open store '" + path + "': " + msg);
  }
  std::unique_ptr<Store> store(new Store(db));
  try {
    store->exec("PRAGMA journal_mode = WAL;");
    store->exec("PRAGMA synchronous = NORMAL;");
    store->exec(kSchema);
  } catch (const Error &e) {
    throw Error(Errc::Store, "cannot initialize store '" + path + "': " + e.what());
  }
  return store;
}

void Store::exec(const char *sql) const {
  char *err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(Errc::Store, msg);
  }
}

sqlite3_stmt *Store::prepare(const char *sql) const {
  if (auto it = statements_.find(sql); it != statements_.end()) return it->second;
  sqlite3_stmt *stmt = nullptr;
  if (sqlite3_prepare_v2(db_, sql, -1, &stmt, nullptr) != SQLITE_OK)
    throw Error(Errc::Store, std::string("prepare failed: ") + sqlite3_errmsg(db_));
  statements_.emplace(sql, stmt);
  return stmt;
}

#define ARENA_STMT(name, sql) \
  std::lock_guard lock(mutex_); \
  Stmt name(db_, prepare(sql))

void Store::transaction(const std::function<void()> &fn) {
  std::lock_guard lock(mutex_);
  exec("BEGIN IMMEDIATE");
  try {
    fn();
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
  exec("COMMIT");
}

void Store::insert_participant(const Participant &p) {
  ARENA_STMT(s, "INSERT INTO participants (id, display_name, method_description, repo_or_service_link, "
                "data_regime, forecasts_public) VALUES (?, ?, ?, ?, ?, ?)");
  s.bind(1, p.id).bind(2, p.display_name).bind(3, p.method_description).bind(4, p.repo_or_service_link);
  s.bind(5, std::string(to_string(p.data_regime))).bind(6, p.forecasts_public ? 1 : 0).run();
}

void Store::update_participant(const Participant &p) {
  ARENA_STMT(s, "UPDATE participants SET display_name = ?, method_description = ?, repo_or_service_link = ?, "
                "data_regime = ?, forecasts_public = ? WHERE id = ?");
  s.bind(1, p.display_name).bind(2, p.method_description).bind(3, p.repo_or_service_link);
  s.bind(4, std::string(to_string(p.data_regime))).bind(5, p.forecasts_public ? 1 : 0).bind(6, p.id).run();
}

std::optional<Participant> Store::find_participant(const std::string &id) const {
  static const std::string sql = std::string(kParticipantCols) + "WHERE id = ?";
  ARENA_STMT(s, sql.c_str());
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  return read_participant(s);
}

std::optional<Participant> Store::find_participant_by_name(const std::string &display_name) const {
  static const std::string sql = std::string(kParticipantCols) + "WHERE display_name = ?";
  ARENA_STMT(s, sql.c_str());
  s.bind(1, display_name);
  if (!s.step()) return std::nullopt;
  return read_participant(s);
}

std::vector<Participant> Store::participants() const {
  static const std::string sql = std::string(kParticipantCols) + "ORDER BY id";
  ARENA_STMT(s, sql.c_str());
  std::vector<Participant> out;
  while (s.step()) out.push_back(read_participant(s));
  return out;
}

void Store::insert_key(const ApiKeyRecord &key) {
  ARENA_STMT(s, "INSERT INTO api_keys (key_id, participant_id, salt, secret_hash, created_at, revoked_at) "
                "VALUES (?, ?, ?, ?, ?, ?)");
  s.bind(1, key.key_id).bind(2, key.participant_id).bind(3, key.salt_hex).bind(4, key.secret_hash_hex);
  s.bind(5, key.created_at).bind(6, key.revoked_at).run();
}

std::optional<ApiKeyRecord> Store::find_key(const std::string &key_id) const {
  ARENA_STMT(s, "SELECT key_id, participant_id, salt, secret_hash, created_at, revoked_at FROM api_keys "
                "WHERE key_id = ?");
  s.bind(1, key_id);
  if (!s.step()) return std::nullopt;
  return read_key(s);
}

std::vector<ApiKeyRecord> Store::keys_of(const std::string &participant_id) const {
  ARENA_STMT(s, "SELECT key_id, participant_id, salt, secret_hash, created_at, revoked_at FROM api_keys "
                "WHERE participant_id = ? ORDER BY created_at, key_id");
  s.bind(1, participant_id);
  std::vector<ApiKeyRecord> out;
  while (s.step()) out.push_back(read_key(s));
  return out;
}

void Store::set_key_revoked(const std::string &key_id, Instant at) {
  ARENA_STMT(s, "UPDATE api_keys SET revoked_at = ? WHERE key_id = ? AND revoked_at IS NULL");
  s.bind(1, at).bind(2, key_id).run();
}

std::int64_t Store::append_submission(const std::string &participant_id, const EventRef &event,
                                      const std::string &payload_json, Instant received_at) {
  ARENA_STMT(s, "INSERT INTO submissions (participant_id, challenge_id, area, delivery_date, payload, received_at) "
                "VALUES (?, ?, ?, ?, ?, ?)");
  s.bind(1, participant_id).bind(2, event.challenge_id).bind(3, event.area).bind(4, event.delivery_date);
  s.bind(5, payload_json).bind(6, received_at).run();
  return sqlite3_last_insert_rowid(db_);
}

std::optional<StoredSubmission> Store::submission(std::int64_t id) const {
  static const std::string sql = std::string(kSubmissionCols) + "WHERE id = ?";
  ARENA_STMT(s, sql.c_str());
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  return read_submission(s);
}

std::vector<StoredSubmission> Store::submissions_for(const std::string &participant_id,
                                                     const EventRef &event) const {
  static const std::string sql = std::string(kSubmissionCols) +
                                 "WHERE participant_id = ? AND challenge_id = ? AND area = ? AND delivery_date = ? "
                                 "ORDER BY id";
  ARENA_STMT(s, sql.c_str());
  s.bind(1, participant_id).bind(2, event.challenge_id).bind(3, event.area).bind(4, event.delivery_date);
  std::vector<StoredSubmission> out;
  while (s.step()) out.push_back(read_submission(s));
  return out;
}

std::optional<StoredSubmission> Store::effective_submission(const std::string &participant_id,
                                                            const EventRef &event, Instant gate) const {
  static const std::string sql = std::string(kSubmissionCols) +
                                 "WHERE participant_id = ? AND challenge_id = ? AND area = ? AND delivery_date = ? "
                                 "AND received_at < ? ORDER BY received_at DESC, id DESC LIMIT 1";
  ARENA_STMT(s, sql.c_str());
  s.bind(1, participant_id).bind(2, event.challenge_id).bind(3, event.area).bind(4, event.delivery_date);
  s.bind(5, gate);
  if (!s.step()) return std::nullopt;
  return read_submission(s);
}

std::vector<std::string> Store::submitters(const EventRef &event) const {
  ARENA_STMT(s, "SELECT DISTINCT participant_id FROM submissions WHERE challenge_id = ? AND area = ? "
                "AND delivery_date = ? ORDER BY participant_id");
  s.bind(1, event.challenge_id).bind(2, event.area).bind(3, event.delivery_date);
  std::vector<std::string> out;
  while (s.step()) out.push_back(s.text(0));
  return out;
}

std::vector<StoredSubmission> Store::all_submissions() const {
  static const std::string sql = std::string(kSubmissionCols) + "ORDER BY id";
  ARENA_STMT(s, sql.c_str());
  std::vector<StoredSubmission> out;
  while (s.step()) out.push_back(read_submission(s));
  return out;
}

std::optional<Date> Store::earliest_submission_date(const std::string &challenge_id) const {
  ARENA_STMT(s, "SELECT MIN(delivery_date) FROM submissions WHERE challenge_id = ?");
  s.bind(1, challenge_id);
  if (!s.step() || s.is_null(0)) return std::nullopt;
  return s.date(0);
}

std::optional<Observation> Store::latest_observation(const std::string &source, const std::string &area,
                                                     Instant timestamp) const {
  ARENA_STMT(s, "SELECT value, version_at FROM observations WHERE source = ? AND area = ? AND ts = ? "
                "ORDER BY version_at DESC LIMIT 1");
  s.bind(1, source).bind(2, area).bind(3, timestamp);
  if (!s.step()) return std::nullopt;
  return Observation{area, timestamp, s.real(0), s.instant(1), source};
}

void Store::insert_observation(const Observation &obs) {
  ARENA_STMT(s, "INSERT INTO observations (source, area, ts, value, version_at) VALUES (?, ?, ?, ?, ?)");
  s.bind(1, obs.source).bind(2, obs.area).bind(3, obs.timestamp).bind(4, obs.value).bind(5, obs.version_at).run();
}

std::vector<Observation> Store::observations(const std::string &source, const std::string &area, Instant from,
                                             Instant to, Instant as_of) const {
  ARENA_STMT(s, "SELECT o.ts, o.value, o.version_at FROM observations o "
                "WHERE o.source = ?1 AND o.area = ?2 AND o.ts >= ?3 AND o.ts < ?4 AND o.version_at = ("
                "  SELECT MAX(v.version_at) FROM observations v WHERE v.source = o.source AND v.area = o.area "
                "  AND v.ts = o.ts AND v.version_at <= ?5) ORDER BY o.ts");
  s.bind(1, source).bind(2, area).bind(3, from).bind(4, to).bind(5, as_of);
  std::vector<Observation> out;
  while (s.step()) out.push_back({area, s.instant(0), s.real(1), s.instant(2), source});
  return out;
}

std::int64_t Store::observation_version_count() const {
  ARENA_STMT(s, "SELECT COUNT(*) FROM observations");
  s.step();
  return s.int64(0);
}

void Store::append_event_scoring(const EventScoring &scoring) {
  ARENA_STMT(s, "INSERT INTO event_scorings (challenge_id, area, delivery_date, version_id, latest_version_at, "
                "scored_at, slots) VALUES (?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, scoring.event.challenge_id).bind(2, scoring.event.area).bind(3, scoring.event.delivery_date);
  s.bind(4, scoring.version_id).bind(5, scoring.latest_version_at).bind(6, scoring.scored_at);
  s.bind(7, scoring.slots).run();
  ++generation_;
}

std::optional<EventScoring> Store::latest_event_scoring(const EventRef &event, std::optional<Instant> as_of) const {
  ARENA_STMT(s, "SELECT challenge_id, area, delivery_date, version_id, latest_version_at, scored_at, slots "
                "FROM event_scorings WHERE challenge_id = ? AND area = ? AND delivery_date = ? "
                "AND (?4 IS NULL OR scored_at <= ?4) ORDER BY scored_at DESC, seq DESC LIMIT 1");
  s.bind(1, event.challenge_id).bind(2, event.area).bind(3, event.delivery_date).bind(4, as_of);
  if (!s.step()) return std::nullopt;
  return read_scoring(s);
}

std::vector<EventScoring> Store::scored_events(const std::string &challenge_id, const std::string &area,
                                               Instant as_of) const {
  ARENA_STMT(s, "SELECT e.challenge_id, e.area, e.delivery_date, e.version_id, e.latest_version_at, e.scored_at, "
                "e.slots FROM event_scorings e WHERE e.challenge_id = ?1 AND e.area = ?2 AND e.seq = ("
                "  SELECT x.seq FROM event_scorings x WHERE x.challenge_id = e.challenge_id AND x.area = e.area "
                "  AND x.delivery_date = e.delivery_date AND x.scored_at <= ?3 "
                "  ORDER BY x.scored_at DESC, x.seq DESC LIMIT 1) "
                "ORDER BY e.delivery_date DESC");
  s.bind(1, challenge_id).bind(2, area).bind(3, as_of);
  std::vector<EventScoring> out;
  while (s.step()) out.push_back(read_scoring(s));
  return out;
}

bool Store::insert_score(const ScoreRecord &r) {
  ARENA_STMT(s, "INSERT OR IGNORE INTO scores (participant_id, challenge_id, area, delivery_date, metric, value, "
                "total, slots, ground_truth_version, scored_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, r.participant_id).bind(2, r.event.challenge_id).bind(3, r.event.area).bind(4, r.event.delivery_date);
  s.bind(5, r.metric).bind(6, r.value).bind(7, r.total).bind(8, r.slots).bind(9, r.ground_truth_version);
  s.bind(10, r.scored_at).run();
  bool inserted = sqlite3_changes(db_) > 0;
  if (inserted) ++generation_;
  return inserted;
}

std::vector<ScoreRecord> Store::scores_for(const EventRef &event, const std::string &ground_truth_version) const {
  static const std::string sql = std::string(kScoreCols) +
                                 "WHERE challenge_id = ? AND area = ? AND delivery_date = ? AND ground_truth_version = ? "
                                 "ORDER BY participant_id, metric";
  ARENA_STMT(s, sql.c_str());
  s.bind(1, event.challenge_id).bind(2, event.area).bind(3, event.delivery_date).bind(4, ground_truth_version);
  std::vector<ScoreRecord> out;
  while (s.step()) out.push_back(read_score(s));
  return out;
}

std::vector<ScoreRecord> Store::all_scores() const {
  static const std::string sql = std::string(kScoreCols) +
                                 "ORDER BY challenge_id, area, delivery_date, participant_id, metric, scored_at";
  ARENA_STMT(s, sql.c_str());
  std::vector<ScoreRecord> out;
  while (s.step()) out.push_back(read_score(s));
  return out;
}

std::uint64_t Store::score_generation() const {
  std::lock_guard lock(mutex_);
  return generation_;
}

std::optional<IngestStatus> Store::ingest_status(const EventRef &event) const {
  ARENA_STMT(s, "SELECT challenge_id, area, delivery_date, attempts, next_attempt_at, last_failure_at, last_error, "
                "stale, completeness FROM ingest_status WHERE challenge_id = ? AND area = ? AND delivery_date = ?");
  s.bind(1, event.challenge_id).bind(2, event.area).bind(3, event.delivery_date);
  if (!s.step()) return std::nullopt;
  return read_ingest(s);
}

void Store::put_ingest_status(const IngestStatus &st) {
  ARENA_STMT(s, "INSERT OR REPLACE INTO ingest_status (challenge_id, area, delivery_date, attempts, next_attempt_at, "
                "last_failure_at, last_error, stale, completeness) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, st.event.challenge_id).bind(2, st.event.area).bind(3, st.event.delivery_date).bind(4, st.attempts);
  s.bind(5, st.next_attempt_at).bind(6, st.last_failure_at).bind(7, st.last_error).bind(8, st.stale ? 1 : 0);
  s.bind(9, st.completeness).run();
}

std::vector<IngestStatus> Store::ingest_statuses() const {
  ARENA_STMT(s, "SELECT challenge_id, area, delivery_date, attempts, next_attempt_at, last_failure_at, last_error, "
                "stale, completeness FROM ingest_status ORDER BY challenge_id, area, delivery_date");
  std::vector<IngestStatus> out;
  while (s.step()) out.push_back(read_ingest(s));
  return out;
}

}  // namespace arena
