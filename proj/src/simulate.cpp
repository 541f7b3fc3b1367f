#include "arena/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "arena/gateway.hpp"
#include "arena/ingest.hpp"
#include "arena/log.hpp"
#include "arena/timezone.hpp"

namespace arena {

std::vector<SyntheticArea> synthesize_areas(const ChallengeSpec &spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = spec.value_range.max - spec.value_range.min;
  const double mid = spec.value_range.min + width / 2.0;
  std::vector<SyntheticArea> out;
  for (const auto &area : spec.areas) {
    const double amplitude = width * (0.1 + 0.2 * unit(rng));
    const double offset = mid + width * (unit(rng) - 0.5) * 0.1;
    out.push_back({area, amplitude, offset});
  }
  return out;
}

double synthetic_value(const SyntheticArea &area, double local_hour, int day_index, double drift) {
  return area.amplitude * std::sin(2.0 * std::numbers::pi * local_hour / 24.0 + drift * day_index) + area.offset;
}

std::string SimulationResult::leaderboard_csv() const {
  std::ostringstream out;
  for (const auto &page : leaderboards)
    out << "# " << page.query.area << " window=" << page.query.window << '\n' << page_to_csv(page);
  return out.str();
}

nlohmann::json SimulationResult::to_json() const {
  nlohmann::json pages = nlohmann::json::array();
  for (const auto &p : leaderboards) pages.push_back(page_to_json(p));
  nlohmann::json truth = nlohmann::json::array();
  for (const auto &a : areas) truth.push_back({{"area", a.area}, {"amplitude", a.amplitude}, {"offset", a.offset}});
  return {{"as_of", format_instant(final_as_of)}, {"truth", truth}, {"leaderboards", pages}};
}

namespace {

struct Step {
  Instant at;
  enum Kind { Submit = 0, Tick = 1 } kind;
  Date date;

  auto key() const { return std::tuple(at, static_cast<int>(kind), std::chrono::sys_days{date}); }
};

std::string slug(std::string_view text) {
  std::string out;
  for (char c : text) out += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

SimulationResult simulate(const ChallengeSpec &spec, const SimulationConfig &config) {
  if (config.days < 1) throw Error(Errc::BadValue, "simulation needs at least one day");
  SimulationResult result;
  result.areas = synthesize_areas(spec, config.seed);
  result.store = Store::open(config.store_path);
  result.registry = std::make_unique<RegistryHandle>(Registry({spec}));
  Store &store = *result.store;
  const RegistryHandle &registry = *result.registry;

  const auto tz = TimeZone::load(spec.reference_timezone);
  const Date first_delivery = add_days(config.start, 1);
  const Date last_delivery = add_days(config.start, config.days);

  // Ground truth for every day of the run, published on the source's own schedule.
  auto source = std::make_shared<SeriesSource>();
  for (Date d = config.start; days_between(d, last_delivery) >= 0; d = add_days(d, 1)) {
    const int k = days_between(config.start, d);
    for (const Instant t : target_timestamps(spec, d)) {
      const auto local = tz.to_local(t);
      const double hour =
          static_cast<double>((local - std::chrono::floor<std::chrono::days>(local)).count()) / 3600.0;
      for (const auto &a : result.areas) source->add({a.area, t, synthetic_value(a, hour, k, config.drift), {}});
    }
  }

  Gateway gateway(registry, store, [] { return Instant{}; });
  Ingestor ingest(registry, store);
  ingest.set_source(spec.ground_truth_source.identity(), source);
  Pipeline pipeline(registry, store, gateway, ingest);

  std::vector<std::pair<BaselineForecaster, std::string>> participants;
  for (std::size_t i = 0; i < config.baselines.size(); ++i) {
    const auto kind = config.baselines[i];
    const std::string id = "b" + std::to_string(i + 1) + "-" + slug(to_string(kind));
    const bool repeated = std::count(config.baselines.begin(), config.baselines.end(), kind) > 1;
    auto p = gateway.register_participant(
        std::string(to_string(kind)) + (repeated ? "#" + std::to_string(i + 1) : ""), id);
    ProfileUpdate profile;
    profile.method_description = std::optional<std::string>("baseline " + std::string(to_string(kind)));
    profile.data_regime = DataRegime::PublicOnly;
    profile.forecasts_public = true;
    gateway.update_profile(p.id, profile);
    participants.emplace_back(BaselineForecaster(kind, config.season_days), id);
    result.participant_ids.push_back(id);
  }

  std::vector<Step> steps;
  for (Date d = first_delivery; days_between(d, last_delivery) >= 0; d = add_days(d, 1)) {
    const auto probe = make_event(spec, spec.areas.front(), d);
    steps.push_back({probe.gate_closure - std::chrono::hours{1}, Step::Submit, d});
    steps.push_back({probe.period_end() + spec.ground_truth_source.publication_lag + std::chrono::hours{1},
                     Step::Tick, d});
  }
  std::sort(steps.begin(), steps.end(), [](const Step &a, const Step &b) { return a.key() < b.key(); });

  const HistoryReader history = [&](const std::string &area, Instant from, Instant to, Instant as_of) {
    return store.observations(spec.ground_truth_source.identity(), area, from, to, as_of);
  };

  Date ingested_through = add_days(config.start, -1);
  auto ingest_published = [&](Instant now) {
    for (Date d = add_days(ingested_through, 1); days_between(d, last_delivery) >= 0; d = add_days(d, 1)) {
      bool complete = true;
      for (const auto &area : spec.areas) {
        const auto event = make_event(spec, area, d);
        if (event.target_timestamps.front() > now) return;
        ingest.upsert(ingest.fetch(event, now).observations);
        complete = complete && ingest.view(event, now).complete();
      }
      if (!complete) return;
      ingested_through = d;
    }
  };

  for (const auto &step : steps) {
    ingest_published(step.at);
    if (step.kind == Step::Tick) {
      result.ticks.push_back(pipeline.tick(step.at));
      result.final_as_of = step.at;
      continue;
    }
    for (const auto &area : spec.areas) {
      const auto event = make_event(spec, area, step.date);
      for (const auto &[forecaster, id] : participants) {
        auto payload = forecaster.forecast(spec, event, history);
        if (!payload) continue;
        gateway.accept_submission(id, event.ref, *payload, step.at);
      }
    }
  }

  for (const auto &area : spec.areas) {
    for (const int w : spec.windows) {
      if (w > config.days) continue;
      result.leaderboards.push_back(
          Leaderboard(registry, store).query({spec.id, area, w, result.final_as_of, std::nullopt, ""}));
    }
  }
  log::info("simulation_finished", {{"challenge", spec.id}, {"days", config.days}, {"seed", config.seed}});
  return result;
}

}  // namespace arena
