#include <doctest.h>

#include <sqlite3.h>

#include <random>

#include "support.hpp"

using namespace arena;
using namespace arena::testing;
using namespace std::chrono_literals;

namespace {

bool has_code(const Diagnostics &d, Errc code) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic &x) { return x.code == code; });
}

ForecastPayload quantile_payload(std::size_t n, double lo, double mid, double hi) {
  ForecastPayload p;
  p.quantiles = ForecastPayload::QuantileBlock{{0.1, 0.5, 0.9},
                                               {std::vector<double>(n, lo), std::vector<double>(n, mid),
                                                std::vector<double>(n, hi)}};
  return p;
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

}  // namespace

TEST_CASE("payload validation") {
  auto spec = berlin_spec();
  spec.value_range = {0, 200000};
  const auto june = make_event(spec, "DE", day("2025-06-02"));
  const auto spring = make_event(spec, "DE", day("2025-03-30"));

  CHECK(validate_payload(spec, june, point_payload(std::vector<double>(24, 50000))).ok());

  const auto short_series = validate_payload(spec, spring, point_payload(std::vector<double>(22, 1)));
  REQUIRE_FALSE(short_series.ok());
  CHECK(has_code(short_series.diagnostics, Errc::MissingTimestamp));
  CHECK(short_series.diagnostics[0].timestamp == format_instant(spring.target_timestamps[22]));

  const auto long_series = validate_payload(spec, spring, point_payload(std::vector<double>(24, 1)));
  CHECK(has_code(long_series.diagnostics, Errc::ExtraTimestamp));

  auto crossing = quantile_payload(24, 10, 20, 30);
  crossing.quantiles->values[2][7] = 9.5;
  const auto crossed = validate_payload(spec, june, crossing);
  REQUIRE_FALSE(crossed.ok());
  const auto &d = crossed.diagnostics;
  REQUIRE(has_code(d, Errc::QuantileCrossing));
  const auto it = std::find_if(d.begin(), d.end(), [](auto &x) { return x.code == Errc::QuantileCrossing; });
  CHECK(it->timestamp == format_instant(june.target_timestamps[7]));

  auto tolerated = quantile_payload(24, 10, 20, 30);
  tolerated.quantiles->values[1][3] = 10.0 - 1e-10;
  CHECK(validate_payload(spec, june, tolerated).ok());

  auto out_of_range = point_payload(std::vector<double>(24, 1));
  out_of_range.point->at(5) = 200001;
  CHECK(has_code(validate_payload(spec, june, out_of_range).diagnostics, Errc::OutOfRange));

  auto nan = point_payload(std::vector<double>(24, 1));
  nan.point->at(0) = std::nan("");
  CHECK(has_code(validate_payload(spec, june, nan).diagnostics, Errc::NonFinite));

  CHECK(has_code(validate_payload(spec, june, ForecastPayload{}).diagnostics, Errc::EmptyPayload));

  auto levels = quantile_payload(24, 1, 2, 3);
  levels.quantiles->levels = {0.1, 0.5, 0.95};
  CHECK(has_code(validate_payload(spec, june, levels).diagnostics, Errc::LevelMismatch));

  ForecastPayload big;
  big.ensemble = std::vector<std::vector<double>>(21, std::vector<double>(24, 1.0));
  CHECK(has_code(validate_payload(spec, june, big).diagnostics, Errc::TooManyMembers));

  auto point_only = spec;
  point_only.payload_kinds = {PayloadKind::Point};
  CHECK(has_code(validate_payload(point_only, june, quantile_payload(24, 1, 2, 3)).diagnostics,
                 Errc::KindNotAllowed));

  // Explicit timestamps, shuffled, align onto the grid.
  ForecastPayload stamped;
  std::vector<Instant> ts = june.target_timestamps;
  std::vector<double> values(24);
  for (std::size_t k = 0; k < 24; ++k) values[k] = static_cast<double>(k);
  std::reverse(ts.begin(), ts.end());
  std::reverse(values.begin(), values.end());
  stamped.timestamps = ts;
  stamped.point = values;
  const auto aligned = validate_payload(spec, june, stamped);
  REQUIRE(aligned.ok());
  CHECK((*aligned->point)(0) == 0.0);
  CHECK((*aligned->point)(23) == 23.0);

  stamped.timestamps->at(0) += 60s;
  CHECK(has_code(validate_payload(spec, june, stamped).diagnostics, Errc::ExtraTimestamp));
}

TEST_CASE("payload JSON decoding") {
  const auto body = nlohmann::json::parse(R"({"point":[1,null,3],"ensemble":[[1,2,3]]})");
  const auto decoded = payload_from_json(body);
  REQUIRE(decoded.ok());
  CHECK(std::isnan(decoded->point->at(1)));
  CHECK(decoded->ensemble->size() == 1);
  CHECK_FALSE(payload_from_json(nlohmann::json::parse(R"({"point":"x"})")).ok());
  CHECK_FALSE(payload_from_json(nlohmann::json::parse("[1,2]")).ok());
}

TEST_CASE("key lifecycle") {
  World w(berlin_spec());
  const auto alice = w.participant("alice");
  const auto key = w.gateway.create_key(alice);
  CHECK(w.gateway.authenticate(key.secret).id == alice);
  CHECK(code_of([&] { w.gateway.authenticate("random-string"); }) == Errc::Unauthenticated);
  CHECK(code_of([&] { w.gateway.authenticate(key.secret + "x"); }) == Errc::Unauthenticated);

  const auto stored = w.store->find_key(key.key_id);
  REQUIRE(stored);
  CHECK(key.secret.find(stored->secret_hash_hex) == std::string::npos);

  w.gateway.revoke_key(alice, key.key_id);
  CHECK_NOTHROW(w.gateway.revoke_key(alice, key.key_id));
  CHECK(code_of([&] { w.gateway.authenticate(key.secret); }) == Errc::Unauthenticated);

  const auto bob = w.participant("bob");
  const auto bob_key = w.gateway.create_key(bob);
  CHECK(code_of([&] { w.gateway.revoke_key(alice, bob_key.key_id); }) == Errc::NotFound);
  CHECK(w.gateway.authenticate(bob_key.secret).id == bob);
}

TEST_CASE("participants and profiles") {
  World w(berlin_spec());
  const auto p = w.gateway.register_participant("Alice");
  CHECK(p.data_regime == DataRegime::Undeclared);
  CHECK_FALSE(p.forecasts_public);
  CHECK(code_of([&] { w.gateway.register_participant("Alice"); }) == Errc::BadValue);

  ProfileUpdate u;
  u.method_description = std::optional<std::string>("gradient boosting");
  u.data_regime = DataRegime::PublicOnly;
  u.forecasts_public = true;
  const auto updated = w.gateway.update_profile(p.id, u);
  CHECK(updated.has_method_info());
  CHECK(updated.data_regime == DataRegime::PublicOnly);
  ProfileUpdate clear;
  clear.method_description = std::optional<std::string>();
  CHECK_FALSE(w.gateway.update_profile(p.id, clear).has_method_info());
}

TEST_CASE("accept_submission at the gate") {
  World w(berlin_spec());
  const auto alice = w.participant("alice");
  const auto e = w.event("DE", day("2025-06-02"));
  const auto payload = point_payload(std::vector<double>(24, 1.0));

  const auto first = w.gateway.accept_submission(alice, e.ref, payload, e.gate_closure - 2h);
  CHECK(first.received_at == e.gate_closure - 2h);
  CHECK(code_of([&] { w.gateway.accept_submission(alice, e.ref, payload, e.gate_closure); }) == Errc::GateClosed);
  const auto second = w.gateway.accept_submission(alice, e.ref, payload, e.gate_closure - 1s);
  CHECK(second.submission_id != first.submission_id);
  CHECK(w.store->submissions_for(alice, e.ref).size() == 2);

  CHECK(code_of([&] {
          w.gateway.accept_submission(alice, {"load", "XX", day("2025-06-02")}, payload, e.gate_closure - 1h);
        }) == Errc::UnknownEvent);
  CHECK(code_of([&] {
          w.gateway.accept_submission(alice, {"nope", "DE", day("2025-06-02")}, payload, e.gate_closure - 1h);
        }) == Errc::UnknownEvent);

  try {
    w.gateway.accept_submission(alice, e.ref, point_payload({1.0}), e.gate_closure - 1h);
    FAIL("expected VALIDATION");
  } catch (const ValidationError &err) {
    CHECK(err.code() == Errc::Validation);
    CHECK(has_code(err.diagnostics(), Errc::MissingTimestamp));
  }

  w.now = e.gate_closure - 30s;
  CHECK(w.gateway.accept_submission(alice, e.ref, payload).received_at == w.now);
}

TEST_CASE("effective submission is the latest before the gate") {
  World w(berlin_spec());
  const auto alice = w.participant("alice");
  const auto e = w.event("DE", day("2025-06-02"));
  CHECK_FALSE(w.gateway.effective_submission(alice, e.ref));

  w.gateway.accept_submission(alice, e.ref, point_payload(std::vector<double>(24, 1.0)), e.gate_closure - 2h);
  const auto later =
      w.gateway.accept_submission(alice, e.ref, point_payload(std::vector<double>(24, 2.0)), e.gate_closure - 1h);
  REQUIRE(w.gateway.effective_submission(alice, e.ref));
  CHECK(w.gateway.effective_submission(alice, e.ref)->id == later.submission_id);

  const auto tie =
      w.gateway.accept_submission(alice, e.ref, point_payload(std::vector<double>(24, 3.0)), e.gate_closure - 1h);
  CHECK(w.gateway.effective_submission(alice, e.ref)->id == tie.submission_id);

  const auto forecasts = w.gateway.effective_forecasts(e);
  REQUIRE(forecasts.size() == 1);
  CHECK((*forecasts[0].forecast.point)(0) == 3.0);
}

TEST_CASE("stored submissions are immutable") {
  World w(berlin_spec());
  const auto alice = w.participant("alice");
  const auto e = w.event("DE", day("2025-06-02"));
  const auto r =
      w.gateway.accept_submission(alice, e.ref, point_payload(std::vector<double>(24, 0.1)), e.gate_closure - 1h);
  const auto before = w.store->submission(r.submission_id);
  REQUIRE(before);

  TempDir dir;
  const auto path = (dir.path() / "s.db").string();
  {
    auto store = Store::open(path);
    store->insert_participant(*w.store->find_participant(alice));
    store->insert_observation({"DE", e.target_timestamps[0], 1.0, e.gate_closure, "src"});
    store->append_submission(alice, e.ref, before->payload_json, before->received_at);
  }
  sqlite3 *db = nullptr;
  REQUIRE(sqlite3_open(path.c_str(), &db) == SQLITE_OK);
  char *err = nullptr;
  CHECK(sqlite3_exec(db, "UPDATE submissions SET payload = 'x'", nullptr, nullptr, &err) != SQLITE_OK);
  sqlite3_free(err);
  CHECK(sqlite3_exec(db, "DELETE FROM submissions", nullptr, nullptr, &err) != SQLITE_OK);
  sqlite3_free(err);
  CHECK(sqlite3_exec(db, "UPDATE observations SET value = 1", nullptr, nullptr, &err) != SQLITE_OK);
  sqlite3_free(err);
  sqlite3_close(db);

  auto reopened = Store::open(path);
  const auto again = reopened->all_submissions();
  REQUIRE(again.size() == 1);
  CHECK(again[0].payload_json == before->payload_json);
  CHECK(again[0].received_at == before->received_at);
  CHECK(w.store->submission(r.submission_id)->payload_json == before->payload_json);
}

TEST_CASE("effective submission replays from the append log") {
  World w(berlin_spec());
  std::mt19937_64 rng(77);
  const std::vector<std::string> people{w.participant("a"), w.participant("b"), w.participant("c")};
  const auto e = w.event("DE", day("2025-06-02"));
  for (int i = 0; i < 40; ++i) {
    const auto who = people[rng() % people.size()];
    const auto now = e.gate_closure - Seconds{static_cast<long>(rng() % 7200)} + 1800s;
    try {
      w.gateway.accept_submission(who, e.ref, point_payload(std::vector<double>(24, i)), now);
    } catch (const Error &) {
    }
  }
  auto replay = Store::open(":memory:");
  for (const auto &p : w.store->participants()) replay->insert_participant(p);
  for (const auto &s : w.store->all_submissions())
    replay->append_submission(s.participant_id, s.event, s.payload_json, s.received_at);
  for (const auto &p : people) {
    const auto a = w.store->effective_submission(p, e.ref, e.gate_closure);
    const auto b = replay->effective_submission(p, e.ref, e.gate_closure);
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      CHECK(a->payload_json == b->payload_json);
      CHECK(a->received_at == b->received_at);
    }
  }
}
