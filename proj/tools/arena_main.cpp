#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "arena/export.hpp"
#include "arena/log.hpp"
#include "arena/server.hpp"
#include "arena/simulate.hpp"

namespace {

using namespace arena;

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kStore = 3, kBind = 4, kExport = 5 };

struct ExitError {
  int code;
  std::string message;
};

struct Options {
  std::string config_dir = "challenges";
  std::string data_root;
  std::string store;
  std::string as_of;
  std::string out;
};

Registry load_registry(const Options &o) {
  std::optional<std::filesystem::path> root;
  if (!o.data_root.empty()) root = o.data_root;
  auto loaded = Registry::load_directory(o.config_dir, root);
  if (!loaded) {
    for (const auto &d : loaded.diagnostics)
      log::error("config_invalid", {{"code", to_string(d.code)}, {"path", d.path}, {"message", d.message}});
    throw ExitError{kConfig, format_diagnostics(loaded.diagnostics)};
  }
  return *loaded;
}

std::unique_ptr<Store> open_store(const Options &o) {
  std::string path = o.store;
  if (path.empty()) {
    const char *env = std::getenv("ARENA_STORE");
    path = env ? env : "arena.db";
  }
  try {
    return Store::open(path);
  } catch (const Error &e) {
    throw ExitError{kStore, e.what()};
  }
}

Instant as_of_or_now(const Options &o) {
  if (o.as_of.empty()) return system_now();
  auto t = parse_instant(o.as_of);
  if (!t) throw ExitError{kConfig, "--as-of must be an RFC 3339 instant"};
  return *t;
}

void emit(const Options &o, const std::string &content, int failure_code) {
  if (o.out.empty() || o.out == "-") {
    std::cout << content;
    return;
  }
  try {
    write_file(o.out, content);
  } catch (const Error &e) {
    throw ExitError{failure_code, e.what()};
  }
}

ApiServer *active_server = nullptr;

void on_signal(int) {
  if (active_server) active_server->stop();
}

int cmd_serve(const Options &o, const std::string &bind_addr, int tick_seconds, int rate_cap) {
  RegistryHandle registry(load_registry(o));
  auto store = open_store(o);
  Gateway gateway(registry, *store);
  Ingestor ingest(registry, *store);
  Pipeline pipeline(registry, *store, gateway, ingest);

  ServerOptions options;
  const auto colon = bind_addr.rfind(':');
  options.host = colon == std::string::npos ? bind_addr : bind_addr.substr(0, colon);
  try {
    options.port = colon == std::string::npos ? 8080 : std::stoi(bind_addr.substr(colon + 1));
  } catch (const std::exception &) {
    throw ExitError{kConfig, "--bind must look like HOST:PORT"};
  }
  if (const char *token = std::getenv("ARENA_ADMIN_TOKEN"); token && *token) options.admin_token = token;
  options.tick_interval = Seconds{tick_seconds};
  options.requests_per_minute = rate_cap;
  options.config_dir = o.config_dir;

  ApiServer server(registry, *store, gateway, ingest, pipeline, options);
  try {
    server.bind();
  } catch (const Error &e) {
    throw ExitError{kBind, e.what()};
  }
  active_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.run();
  active_server = nullptr;
  return kOk;
}

int cmd_tick(const Options &o) {
  RegistryHandle registry(load_registry(o));
  auto store = open_store(o);
  Gateway gateway(registry, *store);
  Ingestor ingest(registry, *store);
  Pipeline pipeline(registry, *store, gateway, ingest);
  const auto report = pipeline.tick(as_of_or_now(o));
  emit(o, report.to_json().dump(2) + "\n", kFailure);
  return kOk;
}

int cmd_simulate(const Options &o, const std::string &challenge, const SimulationConfig &base,
                 const std::vector<std::string> &baselines, const std::string &format) {
  const auto registry = load_registry(o);
  const ChallengeSpec *spec = challenge.empty() ? nullptr : registry.find(challenge);
  if (!challenge.empty() && !spec) throw ExitError{kConfig, "unknown challenge '" + challenge + "'"};
  if (!spec) {
    if (registry.specs().empty()) throw ExitError{kConfig, "no challenges in " + o.config_dir};
    spec = &registry.specs().front();
  }
  SimulationConfig config = base;
  if (!o.store.empty()) config.store_path = o.store;
  if (!baselines.empty()) {
    config.baselines.clear();
    for (const auto &b : baselines) {
      auto kind = parse_baseline_kind(b);
      if (!kind) throw ExitError{kConfig, "unknown baseline '" + b + "'"};
      config.baselines.push_back(*kind);
    }
  }
  SimulationResult result;
  try {
    result = simulate(*spec, config);
  } catch (const Error &e) {
    if (e.code() == Errc::Store) throw ExitError{kStore, e.what()};
    throw;
  }
  emit(o, format == "json" ? result.to_json().dump(2) + "\n" : result.leaderboard_csv(), kExport);
  return kOk;
}

struct ExportArgs {
  std::string kind;
  std::string challenge;
  std::string area;
  int window = 0;
  std::string sort;
  std::string regime;
  bool include_private = false;
  bool all_versions = false;
};

int cmd_export(const Options &o, const ExportArgs &a) {
  const auto kind = parse_export_kind(a.kind);
  if (!kind) throw ExitError{kExport, "UNKNOWN_KIND: '" + a.kind + "' (expected scores, leaderboard or submissions)"};
  auto store = open_store(o);
  ExportFilters filters;
  if (!a.challenge.empty()) filters.challenge_id = a.challenge;
  if (!a.area.empty()) filters.area = a.area;
  filters.include_private = a.include_private;
  filters.all_versions = a.all_versions;

  std::string content;
  switch (*kind) {
    case ExportKind::Scores: content = export_scores(*store, filters); break;
    case ExportKind::Submissions: content = export_submissions(*store, filters); break;
    case ExportKind::Leaderboard: {
      RegistryHandle registry(load_registry(o));
      if (a.challenge.empty() || a.area.empty() || a.window <= 0)
        throw ExitError{kExport, "leaderboard export needs --challenge, --area and --window"};
      LeaderboardQuery q{a.challenge, a.area, a.window, as_of_or_now(o), std::nullopt, a.sort};
      if (!a.regime.empty()) {
        q.data_regime = parse_data_regime(a.regime);
        if (!q.data_regime) throw ExitError{kExport, "unknown regime '" + a.regime + "'"};
      }
      try {
        content = page_to_csv(Leaderboard(registry, *store).query(q));
      } catch (const Error &e) {
        throw ExitError{kExport, std::string(to_string(e.code())) + ": " + e.what()};
      }
      break;
    }
  }
  emit(o, content, kExport);
  return kOk;
}

int cmd_keygen(const Options &o, const std::string &name, const std::string &participant_id) {
  RegistryHandle registry{Registry{}};
  auto store = open_store(o);
  Gateway gateway(registry, *store);
  std::optional<Participant> p =
      participant_id.empty() ? store->find_participant_by_name(name) : store->find_participant(participant_id);
  if (!p) {
    if (name.empty()) throw ExitError{kConfig, "unknown participant; pass --name to register one"};
    p = gateway.register_participant(name, participant_id.empty() ? std::nullopt : std::optional(participant_id));
  }
  const auto key = gateway.create_key(p->id);
  nlohmann::json out{{"participant_id", p->id}, {"display_name", p->display_name}, {"key_id", key.key_id},
                     {"secret", key.secret}};
  emit(o, out.dump(2) + "\n", kFailure);
  return kOk;
}

int cmd_load_challenge(const Options &o, const std::vector<std::string> &files) {
  if (files.empty()) {
    const auto registry = load_registry(o);
    nlohmann::json out = nlohmann::json::array();
    for (const auto &spec : registry.specs()) out.push_back(spec.id);
    emit(o, out.dump(2) + "\n", kFailure);
    return kOk;
  }
  std::string canonical;
  Diagnostics all;
  for (const auto &file : files) {
    std::ifstream in(file);
    if (!in) {
      all.push_back({Errc::Io, file, "cannot read file"});
      continue;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = parse_challenge(buf.str());
    for (auto d : parsed.diagnostics) {
      d.path = file + (d.path.empty() ? "" : ":" + d.path);
      all.push_back(std::move(d));
    }
    if (parsed) canonical += "---\n" + serialize_challenge(*parsed) + "\n";
  }
  if (!all.empty()) throw ExitError{kConfig, format_diagnostics(all)};
  emit(o, canonical, kFailure);
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Forecast arena operator tool"};
  app.require_subcommand(1);
  Options o;
  std::string log_level = "info";
  app.add_option("--config-dir", o.config_dir, "Directory of challenge YAML files");
  app.add_option("--data-root", o.data_root, "Root for fixture paths (defaults to the config dir)");
  app.add_option("--store", o.store, "SQLite store path (default $ARENA_STORE or arena.db)");
  app.add_option("--as-of", o.as_of, "Evaluation instant, RFC 3339 (default now)");
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  auto *serve = app.add_subcommand("serve", "Run the HTTP API and tick scheduler");
  std::string bind_addr = "127.0.0.1:8080";
  int tick_seconds = 300;
  int rate_cap = 600;
  serve->add_option("--bind", bind_addr, "HOST:PORT");
  serve->add_option("--tick-interval", tick_seconds, "Seconds between ticks (0 disables)");
  serve->add_option("--rate-limit", rate_cap, "Requests per minute per credential");

  app.add_subcommand("tick", "Ingest, score and refresh once");

  auto *sim = app.add_subcommand("simulate", "Deterministic end-to-end run with baseline forecasters");
  SimulationConfig sim_config;
  std::string challenge;
  std::vector<std::string> baselines;
  std::string format = "csv";
  std::string start;
  sim->add_option("--challenge", challenge, "Challenge id (default: first in the config dir)");
  sim->add_option("--days", sim_config.days, "Delivery days to simulate")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_config.seed, "Random seed");
  sim->add_option("--drift", sim_config.drift, "Daily phase drift of the synthetic truth (radians)");
  sim->add_option("--season-days", sim_config.season_days, "SEASONAL_NAIVE lag in days")->check(CLI::PositiveNumber);
  sim->add_option("--baseline", baselines, "SEASONAL_NAIVE, PERSISTENCE or CLIMATOLOGY_MEAN (repeatable)");
  sim->add_option("--start", start, "First day of synthetic truth (YYYY-MM-DD)");
  sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto *exp = app.add_subcommand("export", "Write scores, a leaderboard or submissions as CSV");
  ExportArgs ea;
  exp->add_option("kind", ea.kind, "scores, leaderboard or submissions")->required();
  exp->add_option("--challenge", ea.challenge);
  exp->add_option("--area", ea.area);
  exp->add_option("--window", ea.window);
  exp->add_option("--sort", ea.sort);
  exp->add_option("--regime", ea.regime);
  exp->add_flag("--include-private", ea.include_private, "Include private participants' submissions");
  exp->add_flag("--all-versions", ea.all_versions, "Scores on every ground-truth version");

  auto *keygen = app.add_subcommand("keygen", "Issue an API key, registering the participant if needed");
  std::string name;
  std::string participant_id;
  keygen->add_option("--name", name, "Display name");
  keygen->add_option("--participant", participant_id, "Participant id");

  auto *load = app.add_subcommand("load-challenge", "Validate challenge files and print them canonically");
  std::vector<std::string> files;
  load->add_option("files", files, "YAML files (default: every file in --config-dir)");

  CLI11_PARSE(app, argc, argv);

  log::set_min_level(log_level == "debug"  ? log::Level::Debug
                     : log_level == "warn" ? log::Level::Warn
                     : log_level == "error" ? log::Level::Error
                                            : log::Level::Info);
  try {
    if (*serve) return cmd_serve(o, bind_addr, tick_seconds, rate_cap);
    if (app.got_subcommand("tick")) return cmd_tick(o);
    if (*sim) {
      if (!start.empty()) {
        auto d = parse_date(start);
        if (!d) throw ExitError{kConfig, "--start must be YYYY-MM-DD"};
        sim_config.start = *d;
      }
      return cmd_simulate(o, challenge, sim_config, baselines, format);
    }
    if (*exp) return cmd_export(o, ea);
    if (*keygen) return cmd_keygen(o, name, participant_id);
    if (*load) return cmd_load_challenge(o, files);
  } catch (const ExitError &e) {
    std::cerr << e.message << '\n';
    return e.code;
  } catch (const Error &e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == Errc::Store ? kStore : kFailure;
  } catch (const std::exception &e) {
    std::cerr << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
