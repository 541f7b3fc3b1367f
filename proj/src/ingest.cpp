#include "arena/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <sodium.h>

#include "arena/log.hpp"

namespace arena {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const std::string copy(text);
  char *end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size()) return std::nullopt;
  return v;
}

void replace_all(std::string &s, std::string_view from, const std::string &to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

std::vector<RawObservation> parse_observation_csv(std::string_view text, const std::string &origin) {
  std::vector<RawObservation> rows;
  int lines = 0;
  int malformed = 0;
  bool first = true;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (first) {
      first = false;
      if (fields[0] == "area") continue;
    }
    ++lines;
    if (fields.size() != 3 && fields.size() != 4) {
      ++malformed;
      continue;
    }
    auto ts = parse_instant(fields[1]);
    auto value = parse_real(fields[2]);
    std::optional<Instant> available;
    bool ok = ts && value && !fields[0].empty();
    if (ok && fields.size() == 4 && !fields[3].empty()) {
      available = parse_instant(fields[3]);
      ok = available.has_value();
    }
    if (!ok) {
      ++malformed;
      continue;
    }
    rows.push_back({std::string(fields[0]), *ts, *value, available});
  }
  if (lines > 0 && malformed * 20 > lines)
    throw Error(Errc::Parse, origin + ": " + std::to_string(malformed) + " of " + std::to_string(lines) +
                                 " rows malformed");
  if (malformed > 0) log::warn("observation_rows_malformed", {{"origin", origin}, {"count", malformed}});
  return rows;
}

FixtureSource::FixtureSource(std::filesystem::path path) : path_(std::move(path)) {}

std::vector<RawObservation> FixtureSource::fetch(const std::string &area, Instant from, Instant to) {
  std::lock_guard lock(mutex_);
  if (!rows_) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error(Errc::SourceUnavailable, "cannot read fixture " + path_.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    rows_ = parse_observation_csv(buf.str(), path_.string());
  }
  std::vector<RawObservation> out;
  for (const auto &r : *rows_)
    if (r.area == area && r.timestamp >= from && r.timestamp < to) out.push_back(r);
  return out;
}

HttpSource::HttpSource(std::string url_template) : template_(std::move(url_template)) {}

std::vector<RawObservation> HttpSource::fetch(const std::string &area, Instant from, Instant to) {
  std::string url = template_;
  replace_all(url, "{area}", area);
  replace_all(url, "{from}", format_instant(from));
  replace_all(url, "{to}", format_instant(to));

  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw Error(Errc::SourceUnavailable, "only http:// sources are supported: " + url);
  const auto slash = url.find('/', scheme.size());
  const std::string host = url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : url.substr(slash);

  httplib::Client client(host);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  auto res = client.Get(path);
  if (!res) throw Error(Errc::SourceUnavailable, url + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(Errc::SourceUnavailable, url + ": HTTP " + std::to_string(res->status));
  return parse_observation_csv(res->body, url);
}

void SeriesSource::add(RawObservation row) {
  std::lock_guard lock(mutex_);
  rows_.push_back(std::move(row));
}

std::vector<RawObservation> SeriesSource::fetch(const std::string &area, Instant from, Instant to) {
  std::lock_guard lock(mutex_);
  std::vector<RawObservation> out;
  for (const auto &r : rows_)
    if (r.area == area && r.timestamp >= from && r.timestamp < to) out.push_back(r);
  return out;
}

Seconds retry_delay(int attempts) {
  const int exponent = std::clamp(attempts - 1, 0, 6);
  return std::min<Seconds>(std::chrono::minutes{1 << exponent}, kMaxBackoff);
}

std::string ground_truth_version_id(const std::vector<Observation> &observations) {
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  keys.reserve(observations.size());
  for (const auto &o : observations)
    keys.emplace_back(o.timestamp.time_since_epoch().count(), o.version_at.time_since_epoch().count());
  std::sort(keys.begin(), keys.end());
  std::string text;
  for (const auto &[ts, v] : keys) text += std::to_string(ts) + ":" + std::to_string(v) + ";";
  unsigned char digest[16];
  crypto_generichash(digest, sizeof digest, reinterpret_cast<const unsigned char *>(text.data()), text.size(),
                     nullptr, 0);
  char hex[sizeof digest * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
  return hex;
}

Ingestor::Ingestor(const RegistryHandle &registry, Store &store) : registry_(registry), store_(store) {
  if (sodium_init() < 0) throw Error(Errc::Store, "libsodium failed to initialize");
}

void Ingestor::set_source(const std::string &identity, std::shared_ptr<ObservationSource> source) {
  std::lock_guard lock(mutex_);
  sources_[identity] = std::move(source);
}

std::shared_ptr<ObservationSource> Ingestor::source_for(const ChallengeSpec &spec) {
  const auto &ref = spec.ground_truth_source;
  std::lock_guard lock(mutex_);
  auto &slot = sources_[ref.identity()];
  if (!slot) {
    if (ref.kind == SourceKind::FileFixture)
      slot = std::make_shared<FixtureSource>(registry_.get()->data_root() / ref.location);
    else
      slot = std::make_shared<HttpSource>(ref.location);
  }
  return slot;
}

const ChallengeSpec &Ingestor::spec_for(const ForecastEvent &event, const Registry &registry) const {
  return registry.get(event.challenge_id());
}

FetchResult Ingestor::fetch(const ForecastEvent &event, Instant now) {
  auto registry = registry_.get();
  const auto &spec = spec_for(event, *registry);
  const auto &ref = spec.ground_truth_source;
  FetchResult result;
  auto source = source_for(spec);
  if (!source->replayable() && now < event.period_end() + ref.publication_lag) return result;

  const auto rows = source->fetch(event.area(), event.target_timestamps.front(), event.period_end());
  for (const auto &row : rows) {
    if (!std::binary_search(event.target_timestamps.begin(), event.target_timestamps.end(), row.timestamp)) {
      ++result.dropped_off_grid;
      continue;
    }
    if (!std::isfinite(row.value)) {
      ++result.dropped_non_finite;
      continue;
    }
    Instant version_at = now;
    if (source->replayable())
      version_at = row.available_at.value_or(row.timestamp + spec.resolution + ref.publication_lag);
    if (version_at > now) {
      ++result.unpublished;
      continue;
    }
    result.observations.push_back({row.area, row.timestamp, row.value, version_at, ref.identity()});
  }
  if (result.dropped_non_finite > 0 || result.dropped_off_grid > 0)
    log::warn("observation_rows_dropped", {{"event", to_string(event.ref)},
                                           {"non_finite", result.dropped_non_finite},
                                           {"off_grid", result.dropped_off_grid}});
  return result;
}

int Ingestor::upsert(const std::vector<Observation> &observations) {
  auto sorted = observations;
  std::sort(sorted.begin(), sorted.end(), [](const Observation &a, const Observation &b) {
    return std::tie(a.source, a.area, a.timestamp, a.version_at) < std::tie(b.source, b.area, b.timestamp, b.version_at);
  });
  int written = 0;
  store_.transaction([&] {
    for (const auto &obs : sorted) {
      if (!std::isfinite(obs.value)) continue;
      const auto latest = store_.latest_observation(obs.source, obs.area, obs.timestamp);
      if (latest) {
        if (latest->version_at >= obs.version_at) continue;
        if (std::abs(latest->value - obs.value) <= kRevisionThreshold) continue;
      }
      store_.insert_observation(obs);
      ++written;
    }
  });
  return written;
}

GroundTruthView Ingestor::view(const ForecastEvent &event, Instant as_of) const {
  auto registry = registry_.get();
  const auto &spec = spec_for(event, *registry);
  const auto rows = store_.observations(spec.ground_truth_source.identity(), event.area(),
                                        event.target_timestamps.front(), event.period_end(), as_of);
  GroundTruthView v;
  v.event = event.ref;
  v.as_of = as_of;
  const auto n = event.target_timestamps.size();
  v.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), std::numeric_limits<double>::quiet_NaN());
  v.present.assign(n, false);
  std::vector<Observation> used;
  std::size_t present = 0;
  for (const auto &o : rows) {
    auto it = std::lower_bound(event.target_timestamps.begin(), event.target_timestamps.end(), o.timestamp);
    if (it == event.target_timestamps.end() || *it != o.timestamp) continue;
    const auto k = static_cast<std::size_t>(it - event.target_timestamps.begin());
    v.values(static_cast<Eigen::Index>(k)) = o.value;
    v.present[k] = true;
    ++present;
    v.latest_version_at = std::max(v.latest_version_at, o.version_at);
    used.push_back(o);
  }
  v.completeness = n == 0 ? 0.0 : static_cast<double>(present) / static_cast<double>(n);
  v.version_id = ground_truth_version_id(used);
  return v;
}

Instant Ingestor::freeze_end(const ForecastEvent &event) const {
  auto registry = registry_.get();
  return event.period_end() + spec_for(event, *registry).freeze_after;
}

GroundTruthView Ingestor::scoring_view(const ForecastEvent &event, Instant as_of) const {
  return view(event, std::min(as_of, freeze_end(event)));
}

std::vector<ForecastEvent> Ingestor::rescore_candidates(Instant as_of) const {
  auto registry = registry_.get();
  std::vector<ForecastEvent> out;
  for (const auto &spec : registry->specs()) {
    for (const auto &area : spec.areas) {
      for (const auto &scoring : store_.scored_events(spec.id, area, as_of)) {
        const auto event = make_event(spec, area, scoring.event.delivery_date);
        const Instant horizon = event.period_end() + spec.freeze_after;
        if (scoring.scored_at >= horizon) continue;
        const auto v = view(event, std::min(as_of, horizon));
        if (v.complete() && v.version_id != scoring.version_id) out.push_back(event);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ForecastEvent &a, const ForecastEvent &b) { return a.ref < b.ref; });
  return out;
}

IngestOutcome Ingestor::ingest(const ForecastEvent &event, Instant now) {
  IngestOutcome outcome;
  auto registry = registry_.get();
  const auto &spec = spec_for(event, *registry);
  IngestStatus fresh;
  fresh.event = event.ref;
  IngestStatus status = store_.ingest_status(event.ref).value_or(fresh);
  const bool was_stale = status.stale;
  if (status.next_attempt_at && now < *status.next_attempt_at) {
    outcome.completeness = status.completeness;
    return outcome;
  }
  const Instant stale_at = event.period_end() + spec.ground_truth_source.publication_lag + kStaleAfter;
  outcome.attempted = true;
  try {
    const auto fetched = fetch(event, now);
    outcome.new_versions = upsert(fetched.observations);
    status.attempts = 0;
    status.next_attempt_at.reset();
    status.last_error.clear();
  } catch (const Error &e) {
    if (e.code() != Errc::SourceUnavailable && e.code() != Errc::Parse) throw;
    outcome.failed = true;
    ++status.attempts;
    status.last_failure_at = now;
    status.next_attempt_at = now + retry_delay(status.attempts);
    status.last_error = std::string(to_string(e.code())) + ": " + e.what();
    log::warn("ingest_failed", {{"event", to_string(event.ref)},
                                {"code", to_string(e.code())},
                                {"attempts", status.attempts},
                                {"retry_at", format_instant(*status.next_attempt_at)}});
  }
  outcome.completeness = view(event, now).completeness;
  status.completeness = outcome.completeness;
  status.stale = outcome.completeness < 1.0 && now >= stale_at;
  outcome.became_stale = status.stale && !was_stale;
  if (outcome.became_stale)
    log::warn("ingest_stale", {{"event", to_string(event.ref)}, {"completeness", status.completeness}});
  const auto previous = store_.ingest_status(event.ref);
  const bool changed = !previous || previous->attempts != status.attempts ||
                       previous->next_attempt_at != status.next_attempt_at ||
                       previous->last_error != status.last_error || previous->stale != status.stale ||
                       previous->completeness != status.completeness;
  if (changed) store_.put_ingest_status(status);
  return outcome;
}

}  // namespace arena
