// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"

using namespace arena;
using namespace arena::testing;
using namespace std::chrono_literals;

namespace {

struct Failure {
  std::string message;
};

void require(bool ok, const std::string &what) {
  if (!ok) throw Failure{what};
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void require_near(double actual, double expected, double tol, const std::string &what) {
  require(std::abs(actual - expected) <= tol, what + ": got " + num(actual) + ", expected " + num(expected));
}

Eigen::VectorXd vec(const std::vector<double> &v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

Errc error_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  throw Failure{"expected an error"};
}

bool has_code(const Diagnostics &diagnostics, Errc code) {
  return std::any_of(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic &d) { return d.code == code; });
}

std::vector<double> filled(std::size_t n, double v) { return std::vector<double>(n, v); }

// ---------------------------------------------------------------------------
// 1. Submissions are stored exactly when received strictly before gate closure.

void leakage_freedom() {
  World w(berlin_spec());
  std::mt19937_64 rng(20250601);
  std::vector<std::string> participants;
  for (int i = 0; i < 5; ++i) participants.push_back(w.participant("p" + std::to_string(i)));
  std::vector<ForecastEvent> events;
  for (int d = 0; d < 40; ++d)
    for (const auto &area : w.spec.areas) events.push_back(w.event(area, add_days(day("2025-03-10"), d * 7)));

  std::uniform_int_distribution<long> offset(-3 * 3600, 3 * 3600);
  std::map<std::int64_t, std::pair<std::string, Instant>> expected;
  int rejected = 0;
  for (int attempt = 0; attempt < 10'000; ++attempt) {
    const auto &e = events[rng() % events.size()];
    const auto &p = participants[rng() % participants.size()];
    long delta = offset(rng);
    if (attempt % 10 == 0) delta = static_cast<long>(rng() % 3) - 1;
    w.now = e.gate_closure + Seconds{delta};
    const auto payload = point_payload(filled(e.target_timestamps.size(), 1.0));
    try {
      const auto receipt = w.gateway.accept_submission(p, e.ref, payload);
      require(w.now < e.gate_closure, "accepted at " + format_instant(w.now) + " for gate " + format_instant(e.gate_closure));
      expected[receipt.submission_id] = {p, w.now};
    } catch (const Error &err) {
      require(err.code() == Errc::GateClosed, std::string("unexpected rejection: ") + err.what());
      require(w.now >= e.gate_closure, "rejected before the gate: " + format_instant(w.now));
      ++rejected;
    }
  }
  const auto stored = w.store->all_submissions();
  require(stored.size() == expected.size(), "stored " + std::to_string(stored.size()) + " of " +
                                                std::to_string(expected.size()) + " open attempts");
  for (const auto &s : stored) {
    const auto it = expected.find(s.id);
    require(it != expected.end(), "unexpected stored submission " + std::to_string(s.id));
    require(it->second.first == s.participant_id && it->second.second == s.received_at, "stored row differs");
    require(s.received_at < gate_closure(w.spec, s.event.delivery_date), "stored at or after the gate");
  }
  require(rejected > 0 && !expected.empty(), "fuzz did not hit both sides of the gate");
}

// ---------------------------------------------------------------------------
// 2. Scoring rules against independent oracles and worked examples.

void scoring_oracles() {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const int m = 1 + static_cast<int>(rng() % 50);
    std::vector<double> x(static_cast<std::size_t>(m));
    const bool ties = i % 4 == 0;
    for (auto &v : x) v = ties ? std::round(normal(rng)) : normal(rng);
    const double y = i % 7 == 0 ? x[rng() % x.size()] : normal(rng);
    require_near(score::crps_ensemble(vec(x), y), oracle::crps_cdf_integral(x, y), 1e-6,
                 "crps_ensemble case " + std::to_string(i));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int k = static_cast<int>(rng() % 10);
    std::set<double> lower;
    while (static_cast<int>(lower.size()) < k) lower.insert(std::round((0.01 + 0.48 * unit(rng)) * 1e6) / 1e6);
    std::vector<double> levels(lower.begin(), lower.end());
    levels.push_back(0.5);
    for (auto it = lower.rbegin(); it != lower.rend(); ++it) levels.push_back(1.0 - *it);
    std::vector<double> q(levels.size());
    for (auto &v : q) v = 20.0 * unit(rng) - 10.0;
    std::sort(q.begin(), q.end());
    const double y = 24.0 * unit(rng) - 12.0;
    const double w = score::wis<Eigen::VectorXd, double>(levels, vec(q), y);
    const double c = score::crps_quantile<Eigen::VectorXd, double>(levels, vec(q), y);
    require_near(w, c, 1e-12, "wis vs crps_quantile case " + std::to_string(i));
  }

  const std::vector<double> grid{0.1, 0.5, 0.9};
  const std::vector<double> median_only{0.5};
  require(score::mae(vec({1, 3}), vec({2, 1})) == 1.5, "mae([1,3],[2,1]) = 1.5");
  require(score::rmse(vec({3, 4}), vec({0, 0})) == std::sqrt(12.5), "rmse of errors {3,4} = sqrt(12.5)");
  require(score::pinball(2.0, 4.0, 0.5) == 1.0, "pinball(0.5, 2, 4) = 1");
  require_near(score::pinball(10.0, 5.0, 0.9), 0.5, 1e-15, "pinball(0.9, 10, 5)");
  require(score::crps_quantile<Eigen::VectorXd, double>(median_only, vec({2}), 4.0) == 2.0, "crps_quantile({0.5})");
  require_near(score::crps_quantile<Eigen::VectorXd, double>(grid, vec({1, 2, 3}), 2.0), 2.0 / 15.0, 1e-15,
               "crps_quantile({0.1,0.5,0.9},{1,2,3},2)");
  require(score::crps_ensemble(vec({0, 1}), 0.0) == 0.25, "crps_ensemble({0,1},0) = 0.25");
  require(score::interval_score(0.0, 10.0, 0.2, 5.0) == 10.0, "interval_score(0,10,0.2,5) = 10");
  require(score::interval_score(0.0, 10.0, 0.2, 12.0) == 30.0, "interval_score(0,10,0.2,12) = 30");
  require(score::wis<Eigen::VectorXd, double>(median_only, vec({2}), 4.0) == 2.0, "wis({0.5}) = |y - median|");
  require_near(score::wis<Eigen::VectorXd, double>(grid, vec({1, 2, 3}), 2.0), 2.0 / 15.0, 1e-15,
               "wis({0.1,0.5,0.9},{1,2,3},2)");

  // Quantile-only forecasts are scored on MAE through their median.
  AlignedForecast quantile_only;
  quantile_only.levels = grid;
  quantile_only.quantiles = Eigen::MatrixXd(3, 2);
  *quantile_only.quantiles << 0, 1, 2, 4, 5, 6;
  const Eigen::VectorXd observed = vec({1, 1});
  const MetricSpec mae{MetricName::MAE};
  const auto contributions = score::slot_contributions(mae, quantile_only, observed);
  require(score::finalize(mae, contributions.sum(), 2) == score::mae(vec({2, 4}), observed),
          "MAE of a quantile-only forecast uses the 0.5 level");
}

// ---------------------------------------------------------------------------
// 3. Delivery grids follow the local calendar day across DST transitions.

void dst_correctness() {
  const auto spec = berlin_spec();
  const auto spring = make_event(spec, "DE", day("2025-03-30"));
  const auto autumn = make_event(spec, "DE", day("2025-10-26"));
  const auto ordinary = make_event(spec, "DE", day("2025-06-02"));
  require(spring.target_timestamps.size() == 23, "2025-03-30 has 23 slots");
  require(autumn.target_timestamps.size() == 25, "2025-10-26 has 25 slots");
  require(ordinary.target_timestamps.size() == 24, "2025-06-02 has 24 slots");
  require(ordinary.target_timestamps.front() == at("2025-06-01T22:00:00Z"), "2025-06-02 starts 22:00Z");
  require(spring.target_timestamps.front() == at("2025-03-29T23:00:00Z"), "2025-03-30 starts 23:00Z");
  require(autumn.target_timestamps.back() == at("2025-10-26T22:00:00Z"), "2025-10-26 ends 22:00Z");
  require(gate_closure(spec, day("2025-06-02")) == at("2025-06-01T10:00:00Z"), "summer gate");
  require(gate_closure(spec, day("2025-01-15")) == at("2025-01-14T11:00:00Z"), "winter gate");

  auto late = spec;
  late.deadline_local_time = {2, 30};
  require(gate_closure(late, day("2025-03-31")) == at("2025-03-30T01:00:00Z"), "nonexistent deadline moves to 03:00");

  struct Case {
    const ForecastEvent &event;
    std::size_t length;
    std::optional<Errc> code;
  };
  const Case cases[] = {
      {spring, 22, Errc::MissingTimestamp}, {spring, 24, Errc::ExtraTimestamp}, {spring, 23, std::nullopt},
      {autumn, 24, Errc::MissingTimestamp}, {autumn, 26, Errc::ExtraTimestamp}, {autumn, 25, std::nullopt},
      {ordinary, 23, Errc::MissingTimestamp}, {ordinary, 25, Errc::ExtraTimestamp}, {ordinary, 24, std::nullopt},
  };
  for (const auto &c : cases) {
    const auto label = format_date(c.event.delivery_date()) + " with " + std::to_string(c.length) + " values";
    const auto checked = validate_payload(spec, c.event, point_payload(filled(c.length, 1.0)));
    if (c.code) require(!checked.ok() && has_code(checked.diagnostics, *c.code), label + " is rejected");
    else require(checked.ok(), label + " is accepted");
  }

  // Explicit timestamps: a 24-hour UTC day is not the spring-forward day.
  auto explicit_payload = point_payload(filled(24, 1.0));
  std::vector<Instant> stamps;
  for (int h = 0; h < 24; ++h) stamps.push_back(at("2025-03-29T23:00:00Z") + std::chrono::hours{h});
  explicit_payload.timestamps = stamps;
  const auto checked = validate_payload(spec, spring, explicit_payload);
  require(!checked.ok() && has_code(checked.diagnostics, Errc::ExtraTimestamp), "explicit extra timestamp rejected");

  World w(spec);
  const auto p = w.participant("p");
  try {
    w.gateway.accept_submission(p, spring.ref, point_payload(filled(24, 1.0)), spring.gate_closure - 1h);
    throw Failure{"gateway accepted 24 values for a 23-slot day"};
  } catch (const ValidationError &e) {
    require(has_code(e.diagnostics(), Errc::ExtraTimestamp), "gateway reports EXTRA_TIMESTAMP");
  }
  require(w.store->all_submissions().empty(), "rejected payload stored");
}

// ---------------------------------------------------------------------------
// 4. Leaderboard aggregation and ranking against a recomputation from raw data.

struct RawSubmission {
  Instant received_at;
  std::vector<double> point;
  std::vector<std::vector<double>> quantiles;
};

struct NaiveRow {
  std::string participant;
  double coverage = 0.0;
  std::map<std::string, double> metrics;
  std::optional<int> rank;
};

std::vector<NaiveRow> naive_board(const ChallengeSpec &spec, const std::vector<std::string> &participants,
                                  const std::vector<Date> &window_dates,
                                  const std::map<Date, std::vector<double>> &truth,
                                  const std::map<std::pair<std::string, Date>, std::vector<RawSubmission>> &raw) {
  std::vector<NaiveRow> rows;
  for (const auto &p : participants) {
    NaiveRow row{p, 0.0, {}, std::nullopt};
    double abs_sum = 0.0, sq_sum = 0.0, crps_sum = 0.0;
    long slots = 0;
    int covered = 0;
    for (const auto &d : window_dates) {
      const auto it = raw.find({p, d});
      if (it == raw.end()) continue;
      const Instant gate = gate_closure(spec, d);
      const RawSubmission *effective = nullptr;
      for (const auto &s : it->second)
        if (s.received_at < gate && (!effective || s.received_at >= effective->received_at)) effective = &s;
      if (!effective) continue;
      ++covered;
      const auto &y = truth.at(d);
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double e = effective->point[k] - y[k];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        double pin = 0.0;
        for (std::size_t l = 0; l < spec.quantile_levels.size(); ++l)
          pin += oracle::pinball(effective->quantiles[l][k], y[k], spec.quantile_levels[l]);
        crps_sum += 2.0 * pin / static_cast<double>(spec.quantile_levels.size());
      }
      slots += static_cast<long>(y.size());
    }
    if (covered == 0) continue;
    row.coverage = static_cast<double>(covered) / static_cast<double>(window_dates.size());
    row.metrics["MAE"] = abs_sum / static_cast<double>(slots);
    row.metrics["RMSE"] = std::sqrt(sq_sum / static_cast<double>(slots));
    row.metrics["CRPS_QUANTILE"] = crps_sum / static_cast<double>(slots);
    rows.push_back(std::move(row));
  }
  std::vector<NaiveRow> ranked, unranked;
  for (auto &r : rows) (r.coverage == 1.0 ? ranked : unranked).push_back(r);
  std::sort(ranked.begin(), ranked.end(), [](const NaiveRow &a, const NaiveRow &b) {
    return a.metrics.at("MAE") != b.metrics.at("MAE") ? a.metrics.at("MAE") < b.metrics.at("MAE")
                                                      : a.participant < b.participant;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    int better = 0;
    for (const auto &other : ranked)
      if (other.metrics.at("MAE") < ranked[i].metrics.at("MAE")) ++better;
    ranked[i].rank = better + 1;
  }
  std::sort(unranked.begin(), unranked.end(), [](const NaiveRow &a, const NaiveRow &b) {
    return a.coverage != b.coverage ? a.coverage > b.coverage : a.participant < b.participant;
  });
  ranked.insert(ranked.end(), unranked.begin(), unranked.end());
  return ranked;
}

void leaderboard_equivalence() {
  const auto spec = berlin_spec({{MetricName::MAE}, {MetricName::RMSE}, {MetricName::CrpsQuantile}});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int history = 0; history < 50; ++history) {
    World w(spec);
    const int n_participants = 1 + static_cast<int>(rng() % 10);
    const int n_days = 1 + static_cast<int>(rng() % 30);
    const Date start = add_days(day("2025-01-01"), static_cast<int>(rng() % 330));
    std::vector<std::string> participants;
    for (int i = 0; i < n_participants; ++i) participants.push_back(w.participant("h" + std::to_string(i)));
    const double skip = history % 3 == 0 ? 0.0 : 0.15;

    std::map<Date, std::vector<double>> truth;
    std::map<std::pair<std::string, Date>, std::vector<RawSubmission>> raw;
    std::vector<std::pair<Instant, Date>> ticks;
    for (int d = 0; d < n_days; ++d) {
      const Date date = add_days(start, d);
      const auto e = w.event("DE", date);
      const std::size_t n = e.target_timestamps.size();
      for (const auto &p : participants) {
        if (unit(rng) < skip) continue;
        const int attempts = 1 + static_cast<int>(rng() % 3);
        for (int a = 0; a < attempts; ++a) {
          RawSubmission s;
          s.received_at = e.gate_closure - Seconds{1 + static_cast<long>(rng() % (48 * 3600))};
          s.point.resize(n);
          s.quantiles.assign(3, std::vector<double>(n));
          for (std::size_t k = 0; k < n; ++k) {
            s.point[k] = 10.0 * unit(rng);
            const double m = 10.0 * unit(rng);
            s.quantiles[0][k] = m - 2.0 * unit(rng);
            s.quantiles[1][k] = m;
            s.quantiles[2][k] = m + 2.0 * unit(rng);
          }
          ForecastPayload payload = point_payload(s.point);
          payload.quantiles = ForecastPayload::QuantileBlock{spec.quantile_levels, s.quantiles};
          w.gateway.accept_submission(p, e.ref, payload, s.received_at);
          raw[{p, date}].push_back(std::move(s));
        }
        if (unit(rng) < 0.2)
          error_of([&] {
            w.gateway.accept_submission(p, e.ref, point_payload(filled(n, 0.0)), e.gate_closure);
          });
      }
      std::vector<double> y(n);
      for (auto &v : y) v = 10.0 * unit(rng);
      w.publish(e, [&](std::size_t k) { return y[k]; });
      truth[date] = std::move(y);
      ticks.push_back({e.period_end() + 1h, date});
    }
    for (const auto &[t, d] : ticks) w.pipeline.tick(t);

    // Events exist from the first delivery date anyone submitted for.
    std::optional<Date> opening;
    for (const auto &[key, subs] : raw)
      if (!opening || key.second < *opening) opening = key.second;
    if (!opening) continue;
    std::vector<Instant> as_ofs{ticks.back().first, ticks[ticks.size() / 2].first + 30min};
    for (const Instant as_of : as_ofs) {
      std::vector<Date> scored;
      for (auto it = ticks.rbegin(); it != ticks.rend(); ++it)
        if (it->first <= as_of && days_between(*opening, it->second) >= 0) scored.push_back(it->second);
      for (const int n : spec.windows) {
        const std::string label = "history " + std::to_string(history) + " window " + std::to_string(n);
        std::vector<Date> window_dates(scored.begin(), scored.begin() + std::min<std::size_t>(n, scored.size()));
        const auto page = w.leaderboard.query({spec.id, "DE", n, as_of, std::nullopt, ""});
        require(page.delivery_dates == window_dates, label + ": window dates");
        const auto naive = naive_board(spec, participants, window_dates, truth, raw);
        require(page.rows.size() == naive.size(), label + ": row count");
        for (std::size_t i = 0; i < naive.size(); ++i) {
          const auto &row = page.rows[i];
          require(row.participant_id == naive[i].participant, label + ": row order");
          require(row.rank == naive[i].rank, label + ": rank of " + row.participant_id);
          require(row.coverage == naive[i].coverage, label + ": coverage");
          for (const auto &[key, value] : naive[i].metrics) {
            require(row.metrics.at(key).has_value(), label + ": missing " + key);
            require_near(*row.metrics.at(key), value, 1e-12, label + ": " + key + " of " + row.participant_id);
          }
        }
      }
    }
  }

  // Slot-weighted pooling across a short day.
  World w(spec);
  const auto p = w.participant("p");
  for (const auto &[date, error] : {std::pair{"2025-03-30", 0.0}, std::pair{"2025-03-31", 1.0}}) {
    const auto e = w.event("DE", day(date));
    const auto n = e.target_timestamps.size();
    ForecastPayload payload = point_payload(filled(n, error));
    payload.quantiles = ForecastPayload::QuantileBlock{spec.quantile_levels, {filled(n, error), filled(n, error),
                                                                               filled(n, error)}};
    w.gateway.accept_submission(p, e.ref, payload, e.gate_closure - 1h);
    w.publish(e, [](std::size_t) { return 0.0; });
    w.pipeline.tick(e.period_end() + 1h);
  }
  const auto page = w.leaderboard.query({spec.id, "DE", 7, at("2025-04-05T00:00:00Z"), std::nullopt, ""});
  require_near(*page.rows.at(0).metrics.at("MAE"), 24.0 / 47.0, 1e-15, "pooled MAE over a 23-slot and 24-slot day");
}

// ---------------------------------------------------------------------------
// 5. End-to-end simulation of the baselines on periodic truth.

const LeaderboardPage &page_for(const SimulationResult &r, const std::string &area, int window) {
  for (const auto &p : r.leaderboards)
    if (p.query.area == area && p.query.window == window) return p;
  throw Failure{"no " + std::to_string(window) + "-day page for " + area};
}

const LeaderboardRow &row_for(const LeaderboardPage &p, const std::string &id) {
  for (const auto &r : p.rows)
    if (r.participant_id == id) return r;
  throw Failure{"no row for " + id};
}

void end_to_end_simulation() {
  const auto loaded = Registry::load_directory(ARENA_SAMPLE_CONFIG_DIR);
  require(loaded.ok(), "sample configuration loads");
  const auto &spec = loaded->specs().front();
  const SimulationConfig config;
  const auto first = simulate(spec, config);
  const auto second = simulate(spec, config);
  require(first.leaderboard_csv() == second.leaderboard_csv(), "same seed gives byte-identical leaderboard CSV");
  require(first.to_json().dump() == second.to_json().dump(), "same seed gives identical JSON");
  for (const auto &area : first.areas) {
    const auto &page = page_for(first, area.area, 7);
    require(page.delivery_dates.size() == 7, area.area + ": 7 scored days");
    require(page.rows.front().participant_id == "b1-seasonal-naive", area.area + ": seasonal naive listed first");
    const auto &seasonal = row_for(page, "b1-seasonal-naive");
    require(seasonal.rank == 1, area.area + ": seasonal naive ranked 1");
    const double s = *seasonal.metrics.at("MAE");
    require(s <= 1e-9, area.area + ": seasonal naive MAE " + num(s));
    const double c = *row_for(page, "b3-climatology-mean").metrics.at("MAE");
    require(c <= 1e-9 * area.amplitude, area.area + ": climatology MAE " + num(c) + " vs A " + num(area.amplitude));
  }
}

// ---------------------------------------------------------------------------
// 6. Ground-truth revisions rescore inside the freeze horizon only.

std::string rows_of(const LeaderboardPage &page) { return page_to_json(page)["rows"].dump(); }

void revision_policy() {
  auto spec = berlin_spec();
  spec.freeze_after = std::chrono::days{14};
  World w(spec);
  const auto a = w.participant("a");
  const auto b = w.participant("b");
  const Date start = day("2025-09-01");
  std::vector<ForecastEvent> events;
  for (int d = 0; d < 10; ++d) {
    const auto e = w.event("DE", add_days(start, d));
    w.gateway.accept_submission(a, e.ref, point_payload(filled(24, 1.0)), e.gate_closure - 1h);
    w.gateway.accept_submission(b, e.ref, point_payload(filled(24, 2.5)), e.gate_closure - 1h);
    w.publish(e, [](std::size_t k) { return static_cast<double>(k % 3); });
    events.push_back(e);
  }
  const auto &early = events[2];
  const auto &recent = events[7];
  const Instant revised_recent = recent.period_end() + 72h;
  const Instant revised_early = early.period_end() + std::chrono::days{20};
  w.source->add({"DE", recent.target_timestamps[5], 40.0, revised_recent});
  w.source->add({"DE", early.target_timestamps[5], 40.0, revised_early});

  const Instant end = events.back().period_end() + std::chrono::days{25};
  std::map<Instant, std::map<int, std::string>> live;
  auto snapshot = [&](Instant t) {
    for (const int n : spec.windows) live[t][n] = rows_of(w.leaderboard.query({spec.id, "DE", n, t, std::nullopt, ""}));
  };
  for (Instant t = events.front().period_end() + 1h; t <= end; t += 6h) {
    w.pipeline.tick(t);
    snapshot(t);
  }

  auto query = [&](int n, Instant t) { return w.leaderboard.query({spec.id, "DE", n, t, std::nullopt, ""}); };
  const Instant before = revised_recent - 1s;
  const Instant after = revised_recent + 6h;
  const auto seven_before = query(7, before);
  const auto seven_after = query(7, after);
  require(rows_of(seven_before) != rows_of(seven_after), "revision at +3 d changes the 7-day window");
  require(rows_of(query(30, before)) != rows_of(query(30, after)), "revision at +3 d changes the 30-day window");
  require(rows_of(query(1, before)) == rows_of(query(1, after)), "1-day window without the revised day unchanged");

  // a: 24 errors of |1 - k%3| plus one slot moved from |1 - 2| to |1 - 40|.
  double a_abs = 0.0;
  for (int d = 0; d < 7; ++d)
    for (int k = 0; k < 24; ++k) a_abs += std::abs(1.0 - static_cast<double>(k % 3));
  const double a_revised = (a_abs - 1.0 + 39.0) / (7.0 * 24.0);
  require_near(*row_for(seven_after, a).metrics.at("MAE"), a_revised, 1e-12, "revised 7-day MAE");
  require_near(*row_for(seven_before, a).metrics.at("MAE"), a_abs / (7.0 * 24.0), 1e-12, "unrevised 7-day MAE");

  const auto scored_early = w.store->latest_event_scoring(early.ref);
  require(scored_early && scored_early->scored_at < early.period_end() + std::chrono::days{1},
          "event revised after its freeze horizon was never rescored");
  for (const auto &r : w.store->all_scores())
    require(r.scored_at < revised_early, "score written after the late revision");
  for (const int n : spec.windows)
    require(rows_of(query(n, revised_early - 1s)) == rows_of(query(n, end)),
            "revision at +20 d changes window " + std::to_string(n));
  for (const auto &r : w.store->scores_for(early.ref, scored_early->version_id))
    if (r.participant_id == a && r.metric == "MAE")
      require_near(r.value, 16.0 / 24.0, 1e-12, "frozen event keeps its original MAE");

  for (const auto &[t, pages] : live)
    for (const auto &[n, rows] : pages)
      require(rows_of(query(n, t)) == rows, "as_of replay at " + format_instant(t) + " window " + std::to_string(n));
}

// ---------------------------------------------------------------------------
// 7. The final scores do not depend on when or in which order ticks run.

struct FixtureWorld {
  FixtureWorld(const ChallengeSpec &spec, const std::filesystem::path &fixture,
               const std::vector<std::tuple<std::string, EventRef, ForecastPayload, Instant>> &submissions)
      : world(spec) {
    world.ingest.set_source(spec.ground_truth_source.identity(), std::make_shared<FixtureSource>(fixture));
    for (const auto &name : {"x", "y", "z"}) world.participant(name);
    for (const auto &[p, ref, payload, t] : submissions) world.gateway.accept_submission(p, ref, payload, t);
  }

  using Key = std::tuple<std::string, std::string, std::string, double, double, int, std::string>;

  std::set<Key> effective_scores(const std::vector<ForecastEvent> &events) const {
    std::set<Key> out;
    for (const auto &e : events) {
      const auto scoring = world.store->latest_event_scoring(e.ref);
      if (!scoring) continue;
      for (const auto &r : world.store->scores_for(e.ref, scoring->version_id))
        out.insert({r.participant_id, to_string(r.event), r.metric, r.value, r.total, r.slots, r.ground_truth_version});
    }
    return out;
  }

  World world;
};

void tick_idempotence() {
  auto spec = berlin_spec({{MetricName::MAE}, {MetricName::RMSE}, {MetricName::CrpsQuantile}});
  spec.ground_truth_source.publication_lag = Seconds{3600};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Date start = day("2025-10-20");
  std::vector<ForecastEvent> events;
  std::ostringstream csv;
  csv << "area,timestamp_utc,value,available_at\n";
  for (int d = 0; d < 10; ++d) {
    for (const auto &area : spec.areas) {
      const auto e = make_event(spec, area, add_days(start, d));
      events.push_back(e);
      for (const Instant t : e.target_timestamps) {
        const Instant published = e.period_end() + Seconds{static_cast<long>(rng() % (8 * 3600))};
        csv << area << ',' << format_instant(t) << ',' << num(100.0 * unit(rng)) << ',' << format_instant(published)
            << '\n';
        const double roll = unit(rng);
        if (roll < 0.05)
          csv << area << ',' << format_instant(t) << ',' << num(100.0 * unit(rng)) << ','
              << format_instant(e.period_end() + Seconds{static_cast<long>(rng() % (12 * 86400))}) << '\n';
        else if (roll < 0.08)
          csv << area << ',' << format_instant(t) << ',' << num(100.0 * unit(rng)) << ','
              << format_instant(e.period_end() + std::chrono::days{15} + Seconds{static_cast<long>(rng() % 86400)})
              << '\n';
      }
    }
  }
  TempDir dir;
  const auto fixture = dir.path() / "truth.csv";
  write_file(fixture, csv.str());

  std::vector<std::tuple<std::string, EventRef, ForecastPayload, Instant>> submissions;
  {
    World probe(spec);
    for (const auto &name : {"x", "y", "z"}) {
      const auto id = probe.participant(name);
      for (const auto &e : events) {
        if (unit(rng) < 0.1) continue;
        const auto n = e.target_timestamps.size();
        ForecastPayload payload = point_payload(filled(n, 100.0 * unit(rng)));
        const double m = 100.0 * unit(rng);
        payload.quantiles = ForecastPayload::QuantileBlock{spec.quantile_levels, {filled(n, m - 10), filled(n, m),
                                                                                   filled(n, m + 10)}};
        submissions.emplace_back(id, e.ref, payload, e.gate_closure - Seconds{1 + static_cast<long>(rng() % 86400)});
      }
    }
  }

  const Instant first = events.front().period_end() - 12h;
  const Instant final_tick = events.back().period_end() + std::chrono::days{30};
  FixtureWorld reference(spec, fixture, submissions);
  for (Instant t = first; t <= final_tick; t += 1h) reference.world.pipeline.tick(t);
  const auto expected = reference.effective_scores(events);
  for (const auto &e : events)
    require(reference.world.store->latest_event_scoring(e.ref).has_value(), "reference run left " + to_string(e.ref) + " unscored");

  const auto span = (final_tick - first).count();
  for (int schedule = 0; schedule < 100; ++schedule) {
    FixtureWorld run(spec, fixture, submissions);
    std::vector<Instant> ticks;
    const int n = static_cast<int>(rng() % 25);
    for (int i = 0; i < n; ++i) ticks.push_back(first + Seconds{static_cast<long>(rng() % static_cast<std::uint64_t>(span))});
    std::shuffle(ticks.begin(), ticks.end(), rng);
    ticks.insert(ticks.begin() + static_cast<long>(rng() % (ticks.size() + 1)), final_tick);
    for (const Instant t : ticks) run.world.pipeline.tick(t);
    require(run.effective_scores(events) == expected, "schedule " + std::to_string(schedule) + " differs");
  }
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void()> run;
};

}  // namespace

int main() {
  QuietLogs quiet;
  const std::vector<Criterion> criteria{
      {1, "leakage-freedom", 10, leakage_freedom},
      {2, "scoring oracle suite", 5, scoring_oracles},
      {3, "DST correctness", 1, dst_correctness},
      {4, "leaderboard equivalence", 30, leaderboard_equivalence},
      {5, "end-to-end simulation", 60, end_to_end_simulation},
      {6, "revision and freeze policy", 5, revision_policy},
      {7, "tick idempotence", 30, tick_idempotence},
  };
  int failed = 0;
  for (const auto &c : criteria) {
    std::string problem;
    const auto started = std::chrono::steady_clock::now();
    try {
      c.run();
    } catch (const Failure &f) {
      problem = f.message;
    } catch (const std::exception &e) {
      problem = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (problem.empty() && elapsed >= c.limit_seconds)
      problem = "over the " + num(c.limit_seconds) + " s limit";
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs/%gs", elapsed, c.limit_seconds);
    std::cout << (problem.empty() ? "PASS" : "FAIL") << " C" << c.id << ' ' << c.name << " (" << timing << ')';
    if (!problem.empty()) std::cout << ": " << problem;
    std::cout << std::endl;
    if (!problem.empty()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
