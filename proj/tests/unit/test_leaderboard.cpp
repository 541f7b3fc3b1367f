#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace arena;
using namespace arena::testing;
using namespace std::chrono_literals;

namespace {

// Truth is zero everywhere, so each forecast value is its own error.
void play_day(World &w, const Date &d, const std::map<std::string, std::function<double(std::size_t)>> &forecasts,
              const std::string &area = "DE") {
  const auto e = w.event(area, d);
  for (const auto &[who, fn] : forecasts) {
    std::vector<double> v(e.target_timestamps.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(k);
    w.gateway.accept_submission(who, e.ref, point_payload(v), e.gate_closure - 1h);
  }
  w.publish(e, [](std::size_t) { return 0.0; });
  w.pipeline.tick(e.period_end() + 1h);
}

LeaderboardQuery q(const World &w, int window, Instant as_of, std::string sort = "") {
  return {w.spec.id, "DE", window, as_of, std::nullopt, std::move(sort)};
}

Errc code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

LeaderboardRow row(std::string id, std::optional<double> v, double coverage = 1.0) {
  LeaderboardRow r;
  r.participant_id = std::move(id);
  r.metrics["MAE"] = v;
  r.coverage = coverage;
  return r;
}

}  // namespace

TEST_CASE("pooled aggregation examples") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  const auto mae = MetricSpec{MetricName::MAE};

  SUBCASE("errors all 1 over two days") {
    play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 1.0; }}});
    play_day(w, day("2025-06-03"), {{a, [](std::size_t) { return 1.0; }}});
    const auto win = w.leaderboard.window("load", "DE", 7, at("2025-06-10T00:00:00Z"));
    CHECK(w.leaderboard.aggregate(win, mae).at(a) == 1.0);
  }
  SUBCASE("errors 1 then 3") {
    play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 1.0; }}});
    play_day(w, day("2025-06-03"), {{a, [](std::size_t) { return 3.0; }}});
    const auto win = w.leaderboard.window("load", "DE", 7, at("2025-06-10T00:00:00Z"));
    CHECK(w.leaderboard.aggregate(win, mae).at(a) == 2.0);
  }
  SUBCASE("DST day pools by slot count") {
    play_day(w, day("2025-03-30"), {{a, [](std::size_t) { return 0.0; }}});
    play_day(w, day("2025-03-31"), {{a, [](std::size_t) { return 1.0; }}});
    const auto win = w.leaderboard.window("load", "DE", 7, at("2025-04-05T00:00:00Z"));
    CHECK(w.leaderboard.aggregate(win, mae).at(a) == doctest::Approx(24.0 / 47.0).epsilon(1e-15));
    const auto page = w.leaderboard.query(q(w, 7, at("2025-04-05T00:00:00Z")));
    CHECK(page.rows[0].metrics.at("MAE") == doctest::Approx(0.5106).epsilon(1e-4));
    CHECK(page_to_json(page)["rows"][0]["metrics"]["MAE"] == 0.5106);
  }
}

TEST_CASE("RMSE pools squares, not daily roots") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 1.0; }}});
  play_day(w, day("2025-06-03"), {{a, [](std::size_t) { return 3.0; }}});
  const auto win = w.leaderboard.window("load", "DE", 7, at("2025-06-10T00:00:00Z"));
  CHECK(w.leaderboard.aggregate(win, {MetricName::RMSE}).at(a) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("rank_rows") {
  auto ranked = rank_rows({row("B", 2.0), row("A", 1.0)}, "MAE");
  CHECK(ranked[0].participant_id == "A");
  CHECK(ranked[0].rank == 1);
  CHECK(ranked[1].rank == 2);

  ranked = rank_rows({row("C", 2.0), row("B", 1.0), row("A", 1.0)}, "MAE");
  CHECK(ranked[0].participant_id == "A");
  CHECK(ranked[0].rank == 1);
  CHECK(ranked[1].rank == 1);
  CHECK(ranked[2].rank == 3);

  ranked = rank_rows({row("C", 0.1, 0.5), row("A", 1.0), row("D", 0.0, 0.75), row("E", std::nullopt)}, "MAE");
  CHECK(ranked[0].participant_id == "A");
  CHECK(ranked[0].rank == 1);
  CHECK(ranked[1].participant_id == "E");
  CHECK_FALSE(ranked[1].rank);
  CHECK(ranked[2].participant_id == "D");
  CHECK(ranked[3].participant_id == "C");
  CHECK_FALSE(ranked[3].rank);
}

TEST_CASE("query errors, filters and determinism") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  const auto b = w.participant("b");
  ProfileUpdate pub;
  pub.data_regime = DataRegime::PublicOnly;
  w.gateway.update_profile(a, pub);
  play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 1.0; }}, {b, [](std::size_t) { return 2.0; }}});
  const auto as_of = at("2025-06-05T00:00:00Z");

  CHECK(code_of([&] { w.leaderboard.query(q(w, 5, as_of)); }) == Errc::UnknownWindow);
  CHECK(code_of([&] { w.leaderboard.query({"load", "XX", 7, as_of, std::nullopt, ""}); }) == Errc::UnknownArea);
  CHECK(code_of([&] { w.leaderboard.query({"zzz", "DE", 7, as_of, std::nullopt, ""}); }) == Errc::UnknownChallenge);
  CHECK(code_of([&] { w.leaderboard.query(q(w, 7, as_of, "WIS")); }) == Errc::UnknownMetric);

  auto filtered = q(w, 7, as_of);
  filtered.data_regime = DataRegime::PublicOnly;
  const auto page = w.leaderboard.query(filtered);
  REQUIRE(page.rows.size() == 1);
  CHECK(page.rows[0].participant_id == a);

  const auto one = page_to_json(w.leaderboard.query(q(w, 7, as_of))).dump();
  const auto two = page_to_json(w.leaderboard.query(q(w, 7, as_of))).dump();
  CHECK(one == two);
  CHECK(page_to_csv(w.leaderboard.query(q(w, 7, as_of))) == page_to_csv(w.leaderboard.query(q(w, 7, as_of))));
}

TEST_CASE("coverage and UNRANKED rows") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  const auto c = w.participant("c");
  play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 5.0; }}, {c, [](std::size_t) { return 0.0; }}});
  play_day(w, day("2025-06-03"), {{a, [](std::size_t) { return 5.0; }}});
  const auto page = w.leaderboard.query(q(w, 7, at("2025-06-10T00:00:00Z")));
  REQUIRE(page.rows.size() == 2);
  CHECK(page.rows[0].participant_id == a);
  CHECK(page.rows[0].rank == 1);
  CHECK(page.rows[1].participant_id == c);
  CHECK(page.rows[1].coverage == 0.5);
  CHECK_FALSE(page.rows[1].rank);
  CHECK(page_to_json(page)["rows"][1]["rank"] == "UNRANKED");
}

TEST_CASE("window is the latest N scored deliveries at as_of") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  for (int i = 0; i < 5; ++i)
    play_day(w, add_days(day("2025-06-02"), i), {{a, [i](std::size_t) { return static_cast<double>(i); }}});
  const auto win = w.leaderboard.window("load", "DE", 3, at("2025-06-30T00:00:00Z"));
  CHECK(win.delivery_dates() == std::vector<Date>{day("2025-06-06"), day("2025-06-05"), day("2025-06-04")});
  const auto early = w.leaderboard.window("load", "DE", 3, make_event(w.spec, "DE", day("2025-06-03")).period_end());
  CHECK(early.delivery_dates().size() == 1);

  // N = 1 equals the day's own event scalar.
  for (int i = 0; i < 5; ++i) {
    const auto e = w.event("DE", add_days(day("2025-06-02"), i));
    const auto as_of = e.period_end() + 1h;
    const auto page = w.leaderboard.query(q(w, 1, as_of));
    REQUIRE(page.delivery_dates == std::vector<Date>{e.delivery_date()});
    const auto scoring = w.store->latest_event_scoring(e.ref);
    double scalar = -1;
    for (const auto &r : w.store->scores_for(e.ref, scoring->version_id))
      if (r.metric == "MAE") scalar = r.value;
    CHECK(page.rows[0].metrics.at("MAE") == scalar);
  }
}

TEST_CASE("ranking is invariant under positive error scaling") {
  QuietLogs quiet;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<std::vector<double>> errors(6, std::vector<double>(48));
  for (auto &p : errors)
    for (auto &x : p) x = u(rng);

  auto ranks = [&](double scale, const std::string &metric) {
    World w(berlin_spec());
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < errors.size(); ++i) ids.push_back(w.participant("p" + std::to_string(i)));
    for (int d = 0; d < 2; ++d) {
      std::map<std::string, std::function<double(std::size_t)>> f;
      for (std::size_t i = 0; i < ids.size(); ++i)
        f[ids[i]] = [&, i, d](std::size_t k) { return scale * errors[i][static_cast<std::size_t>(d) * 24 + k]; };
      play_day(w, add_days(day("2025-06-02"), d), f);
    }
    std::vector<std::string> order;
    for (const auto &r : w.leaderboard.query(q(w, 7, at("2025-06-10T00:00:00Z"), metric)).rows)
      order.push_back(r.participant_id);
    return order;
  };
  for (const char *metric : {"MAE", "RMSE"}) {
    const auto base = ranks(1.0, metric);
    CHECK(ranks(3.5, metric) == base);
    CHECK(ranks(0.01, metric) == base);
  }
}

TEST_CASE("CSV carries the same values as JSON") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a,b");
  const auto b = w.participant("plain");
  play_day(w, day("2025-06-02"),
           {{a, [](std::size_t k) { return 1.0 / 3.0 + static_cast<double>(k); }}, {b, [](std::size_t) { return 2.0; }}});
  const auto page = w.leaderboard.query(q(w, 7, at("2025-06-10T00:00:00Z")));
  const auto json = page_to_json(page);
  const auto csv = page_to_csv(page);
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(csv);
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "rank,participant,display_name,MAE,RMSE,coverage,data_regime,has_method_info,forecasts_public");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto &r = json["rows"][i];
    const std::string pid = r["participant"];
    const std::string quoted = pid.find(',') == std::string::npos ? pid : "\"" + pid + "\"";
    const std::string expect = r["rank"].dump() + "," + quoted + "," + quoted + "," + r["metrics"]["MAE"].dump() +
                               "," + r["metrics"]["RMSE"].dump() + "," + r["coverage"].dump() + "," +
                               r["data_regime"].get<std::string>() + "," + r["has_method_info"].dump() + "," +
                               r["forecasts_public"].dump();
    CHECK(lines[i + 1] == expect);
  }
}

TEST_CASE("unscored window events are reported") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 1.0; }}});
  auto win = w.leaderboard.window("load", "DE", 7, at("2025-06-10T00:00:00Z"));
  win.events[0].version_id = "not-a-version";
  CHECK(code_of([&] { w.leaderboard.aggregate(win, {MetricName::MAE}); }) == Errc::UnscoredEvent);
}

TEST_CASE("series exposes public forecasts after the gate only") {
  QuietLogs quiet;
  World w(berlin_spec());
  const auto a = w.participant("a");
  const auto b = w.participant("b");
  ProfileUpdate pub;
  pub.forecasts_public = true;
  w.gateway.update_profile(a, pub);
  play_day(w, day("2025-06-02"), {{a, [](std::size_t) { return 1.0; }}, {b, [](std::size_t) { return 2.0; }}});
  const auto e = w.event("DE", day("2025-06-02"));
  const auto s =
      w.leaderboard.series(w.ingest, "load", "DE", {a, b}, e.delivery_date(), e.delivery_date(), e.period_end() + 2h);
  REQUIRE(s["forecasts"].size() == 1);
  CHECK(s["forecasts"][0]["participant"] == a);
  CHECK(s["forecasts"][0]["points"].size() == 24);
  CHECK(s["omitted"].size() == 1);
  CHECK(s["omitted"][0]["participant"] == b);
  CHECK(s["ground_truth"].size() == 24);
  const auto before = w.leaderboard.series(w.ingest, "load", "DE", {a}, e.delivery_date(), e.delivery_date(),
                                           e.gate_closure - 1s);
  CHECK(before["forecasts"][0]["points"].empty());
}
