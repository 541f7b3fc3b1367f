#include "arena/leaderboard.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "arena/ingest.hpp"
#include "arena/payload.hpp"
#include "arena/temporal.hpp"

namespace arena {

std::vector<Date> LeaderboardWindow::delivery_dates() const {
  std::vector<Date> out;
  out.reserve(events.size());
  for (const auto &e : events) out.push_back(e.event.delivery_date);
  return out;
}

double round_display(double value) { return std::round(value * 1e4) / 1e4; }

std::vector<LeaderboardRow> rank_rows(std::vector<LeaderboardRow> rows, const std::string &sort_metric) {
  auto sort_value = [&](const LeaderboardRow &r) -> std::optional<double> {
    auto it = r.metrics.find(sort_metric);
    return it == r.metrics.end() ? std::nullopt : it->second;
  };
  std::vector<LeaderboardRow> ranked;
  std::vector<LeaderboardRow> unranked;
  for (auto &r : rows) {
    r.rank.reset();
    if (r.coverage == 1.0 && sort_value(r)) ranked.push_back(std::move(r));
    else unranked.push_back(std::move(r));
  }
  std::sort(ranked.begin(), ranked.end(), [&](const LeaderboardRow &a, const LeaderboardRow &b) {
    const double va = *sort_value(a), vb = *sort_value(b);
    if (va != vb) return va < vb;
    return a.participant_id < b.participant_id;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i > 0 && *sort_value(ranked[i]) == *sort_value(ranked[i - 1])) ranked[i].rank = ranked[i - 1].rank;
    else ranked[i].rank = static_cast<int>(i + 1);
  }
  std::sort(unranked.begin(), unranked.end(), [](const LeaderboardRow &a, const LeaderboardRow &b) {
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return a.participant_id < b.participant_id;
  });
  ranked.insert(ranked.end(), std::make_move_iterator(unranked.begin()), std::make_move_iterator(unranked.end()));
  return ranked;
}

nlohmann::json row_to_json(const LeaderboardRow &row, const std::vector<std::string> &metric_keys) {
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json exact = nlohmann::json::object();
  for (const auto &key : metric_keys) {
    auto it = row.metrics.find(key);
    if (it != row.metrics.end() && it->second) {
      metrics[key] = round_display(*it->second);
      exact[key] = *it->second;
    } else {
      metrics[key] = nullptr;
      exact[key] = nullptr;
    }
  }
  nlohmann::json j;
  j["rank"] = row.rank ? nlohmann::json(*row.rank) : nlohmann::json("UNRANKED");
  j["participant"] = row.participant_id;
  j["display_name"] = row.display_name;
  j["metrics"] = std::move(metrics);
  j["metrics_exact"] = std::move(exact);
  j["coverage"] = round_display(row.coverage);
  j["data_regime"] = to_string(row.data_regime);
  j["has_method_info"] = row.has_method_info;
  j["forecasts_public"] = row.forecasts_public;
  return j;
}

nlohmann::json page_to_json(const LeaderboardPage &page) {
  nlohmann::json dates = nlohmann::json::array();
  for (const auto &d : page.delivery_dates) dates.push_back(format_date(d));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &r : page.rows) rows.push_back(row_to_json(r, page.metric_keys));
  nlohmann::json j;
  j["challenge"] = page.query.challenge_id;
  j["area"] = page.query.area;
  j["window"] = page.query.window;
  j["as_of"] = format_instant(page.query.as_of);
  j["sort"] = page.query.sort_metric;
  j["regime"] = page.query.data_regime ? nlohmann::json(to_string(*page.query.data_regime)) : nlohmann::json(nullptr);
  j["metrics"] = page.metric_keys;
  j["delivery_dates"] = std::move(dates);
  j["rows"] = std::move(rows);
  return j;
}

namespace {

std::string csv_field(const nlohmann::json &v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.is_null() ? std::string() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

std::string page_to_csv(const LeaderboardPage &page) {
  std::ostringstream out;
  out << "rank,participant,display_name";
  for (const auto &k : page.metric_keys) out << ',' << csv_field(k);
  out << ",coverage,data_regime,has_method_info,forecasts_public\n";
  for (const auto &row : page.rows) {
    const auto j = row_to_json(row, page.metric_keys);
    out << csv_field(j["rank"]) << ',' << csv_field(j["participant"]) << ',' << csv_field(j["display_name"]);
    for (const auto &k : page.metric_keys) out << ',' << csv_field(j["metrics"][k]);
    out << ',' << csv_field(j["coverage"]) << ',' << csv_field(j["data_regime"]) << ','
        << csv_field(j["has_method_info"]) << ',' << csv_field(j["forecasts_public"]) << '\n';
  }
  return out.str();
}

Leaderboard::Leaderboard(const RegistryHandle &registry, const Store &store) : registry_(registry), store_(store) {}

LeaderboardWindow Leaderboard::window(const std::string &challenge_id, const std::string &area, int n,
                                      Instant as_of) const {
  LeaderboardWindow w{challenge_id, area, n, as_of, {}};
  auto scored = store_.scored_events(challenge_id, area, as_of);
  if (static_cast<int>(scored.size()) > n) scored.resize(static_cast<std::size_t>(n));
  w.events = std::move(scored);
  return w;
}

std::map<std::string, double> Leaderboard::aggregate(const LeaderboardWindow &window, const MetricSpec &metric) const {
  const std::string key = metric.key();
  std::map<std::string, std::pair<double, long>> pooled;
  for (const auto &e : window.events) {
    const auto current = store_.latest_event_scoring(e.event, window.as_of);
    if (!current || current->version_id != e.version_id)
      throw Error(Errc::UnscoredEvent, to_string(e.event) + " is not scored at " + format_instant(window.as_of));
    for (const auto &r : store_.scores_for(e.event, e.version_id)) {
      if (r.metric != key) continue;
      auto &[total, slots] = pooled[r.participant_id];
      total += r.total;
      slots += r.slots;
    }
  }
  std::map<std::string, double> out;
  for (const auto &[participant, acc] : pooled)
    out[participant] = score::finalize(metric, acc.first, static_cast<Eigen::Index>(acc.second));
  return out;
}

LeaderboardPage Leaderboard::compute(const LeaderboardQuery &query, const ChallengeSpec &spec) const {
  LeaderboardPage page;
  page.query = query;
  for (const auto &m : spec.metrics) page.metric_keys.push_back(m.key());

  const auto w = window(query.challenge_id, query.area, query.window, query.as_of);
  page.delivery_dates = w.delivery_dates();
  if (w.events.empty()) return page;

  // Participants with an effective submission per window event.
  std::map<std::string, int> covered;
  for (const auto &e : w.events) {
    const Instant gate = gate_closure(spec, e.event.delivery_date);
    for (const auto &p : store_.submitters(e.event))
      if (store_.effective_submission(p, e.event, gate)) ++covered[p];
  }

  std::map<std::string, std::map<std::string, std::pair<double, long>>> pooled;
  std::map<std::string, std::map<std::string, int>> record_counts;
  for (const auto &e : w.events) {
    for (const auto &r : store_.scores_for(e.event, e.version_id)) {
      auto &[total, slots] = pooled[r.participant_id][r.metric];
      total += r.total;
      slots += r.slots;
      ++record_counts[r.participant_id][r.metric];
    }
  }

  std::vector<LeaderboardRow> rows;
  for (const auto &[participant_id, count] : covered) {
    const auto participant = store_.find_participant(participant_id);
    if (!participant) continue;
    if (query.data_regime && participant->data_regime != *query.data_regime) continue;
    LeaderboardRow row;
    row.participant_id = participant_id;
    row.display_name = participant->display_name;
    row.coverage = static_cast<double>(count) / static_cast<double>(w.events.size());
    row.data_regime = participant->data_regime;
    row.has_method_info = participant->has_method_info();
    row.forecasts_public = participant->forecasts_public;
    for (const auto &metric : spec.metrics) {
      const auto key = metric.key();
      std::optional<double> value;
      auto pit = pooled.find(participant_id);
      if (pit != pooled.end()) {
        auto mit = pit->second.find(key);
        if (mit != pit->second.end() && record_counts[participant_id][key] == count)
          value = score::finalize(metric, mit->second.first, static_cast<Eigen::Index>(mit->second.second));
      }
      row.metrics[key] = value;
    }
    rows.push_back(std::move(row));
  }
  page.rows = rank_rows(std::move(rows), query.sort_metric);
  return page;
}

LeaderboardPage Leaderboard::query(const LeaderboardQuery &q) const {
  auto registry = registry_.get();
  const auto *spec = registry->find(q.challenge_id);
  if (!spec) throw Error(Errc::UnknownChallenge, "unknown challenge '" + q.challenge_id + "'");
  if (!spec->has_area(q.area)) throw Error(Errc::UnknownArea, "challenge has no area '" + q.area + "'");
  if (std::find(spec->windows.begin(), spec->windows.end(), q.window) == spec->windows.end())
    throw Error(Errc::UnknownWindow, "window " + std::to_string(q.window) + " is not offered");
  LeaderboardQuery normalized = q;
  if (normalized.sort_metric.empty()) normalized.sort_metric = spec->metrics.front().key();
  if (!spec->find_metric(normalized.sort_metric))
    throw Error(Errc::UnknownMetric, "challenge has no metric '" + normalized.sort_metric + "'");

  std::ostringstream key;
  key << static_cast<const void *>(registry.get()) << '|' << normalized.challenge_id << '|' << normalized.area << '|'
      << normalized.window << '|' << normalized.as_of.time_since_epoch().count() << '|'
      << (normalized.data_regime ? to_string(*normalized.data_regime) : "") << '|' << normalized.sort_metric;
  const auto generation = store_.score_generation();
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key.str());
    if (it != cache_.end() && it->second.first == generation) return it->second.second;
  }
  auto page = compute(normalized, *spec);
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() > 512) cache_.clear();
  cache_[key.str()] = {generation, page};
  return page;
}

nlohmann::json Leaderboard::series(const Ingestor &ingest, const std::string &challenge_id, const std::string &area,
                                   const std::vector<std::string> &participants, const Date &from, const Date &to,
                                   Instant as_of) const {
  auto registry = registry_.get();
  const auto *spec = registry->find(challenge_id);
  if (!spec) throw Error(Errc::UnknownChallenge, "unknown challenge '" + challenge_id + "'");
  if (!spec->has_area(area)) throw Error(Errc::UnknownArea, "challenge has no area '" + area + "'");
  if (days_between(from, to) < 0) throw Error(Errc::BadValue, "'from' is after 'to'");
  if (days_between(from, to) > 366) throw Error(Errc::BadValue, "date range longer than 366 days");

  nlohmann::json truth = nlohmann::json::array();
  nlohmann::json forecasts = nlohmann::json::array();
  nlohmann::json omitted = nlohmann::json::array();
  std::vector<std::string> visible;
  for (const auto &id : std::set<std::string>(participants.begin(), participants.end())) {
    const auto p = store_.find_participant(id);
    if (p && p->forecasts_public) visible.push_back(id);
    else omitted.push_back({{"participant", id}, {"reason", "forecasts are not public"}});
  }
  std::map<std::string, nlohmann::json> per_participant;
  for (const auto &id : visible) per_participant[id] = nlohmann::json::array();

  for (Date d = from; days_between(d, to) >= 0; d = add_days(d, 1)) {
    const auto event = make_event(*spec, area, d);
    const auto v = ingest.view(event, as_of);
    for (std::size_t k = 0; k < event.target_timestamps.size(); ++k) {
      const auto idx = static_cast<Eigen::Index>(k);
      truth.push_back({{"timestamp", format_instant(event.target_timestamps[k])},
                       {"value", v.present[k] ? nlohmann::json(v.values(idx)) : nlohmann::json(nullptr)}});
    }
    if (as_of < event.gate_closure) continue;
    for (const auto &id : visible) {
      const auto sub = store_.effective_submission(id, event.ref, event.gate_closure);
      if (!sub) continue;
      const auto forecast = aligned_from_json(nlohmann::json::parse(sub->payload_json));
      const auto point = forecast.derived_point();
      for (std::size_t k = 0; k < event.target_timestamps.size(); ++k) {
        const auto idx = static_cast<Eigen::Index>(k);
        nlohmann::json entry{{"timestamp", format_instant(event.target_timestamps[k])}};
        if (point) entry["point"] = (*point)(idx);
        if (forecast.quantiles) {
          nlohmann::json q = nlohmann::json::object();
          for (std::size_t l = 0; l < forecast.levels.size(); ++l)
            q[nlohmann::json(forecast.levels[l]).dump()] = (*forecast.quantiles)(static_cast<Eigen::Index>(l), idx);
          entry["quantiles"] = std::move(q);
        }
        per_participant[id].push_back(std::move(entry));
      }
    }
  }
  for (auto &[id, points] : per_participant) forecasts.push_back({{"participant", id}, {"points", std::move(points)}});
  return {{"challenge", challenge_id},  {"area", area},          {"from", format_date(from)},
          {"to", format_date(to)},      {"as_of", format_instant(as_of)}, {"ground_truth", std::move(truth)},
          {"forecasts", std::move(forecasts)}, {"omitted", std::move(omitted)}};
}

}  // namespace arena
