#include "arena/server.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <thread>

#include <httplib.h>
#include <sodium.h>

#include "arena/log.hpp"

namespace arena {

namespace {

using nlohmann::json;

constexpr std::string_view kSessionCookie = "arena_session";
constexpr auto kSessionLifetime = std::chrono::hours{12};

struct RateLimited {};

int http_status(Errc code) {
  switch (code) {
    case Errc::Unauthenticated: return 401;
    case Errc::GateClosed: return 403;
    case Errc::NotFound:
    case Errc::UnknownEvent:
    case Errc::UnknownChallenge:
    case Errc::UnknownArea: return 404;
    case Errc::Validation: return 422;
    case Errc::UnknownWindow:
    case Errc::UnknownMetric:
    case Errc::BadValue:
    case Errc::Parse:
    case Errc::Syntax: return 400;
    default: return 500;
  }
}

json diagnostics_json(const Diagnostics &diagnostics) {
  json out = json::array();
  for (const auto &d : diagnostics) {
    json j{{"code", to_string(d.code)}, {"path", d.path}, {"message", d.message}};
    if (d.timestamp) j["timestamp"] = *d.timestamp;
    if (d.level) j["level"] = *d.level;
    out.push_back(std::move(j));
  }
  return out;
}

void send_json(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, Errc code, const std::string &message, const Diagnostics &diagnostics = {}) {
  json body{{"error", to_string(code)}, {"message", message}};
  if (!diagnostics.empty()) body["diagnostics"] = diagnostics_json(diagnostics);
  send_json(res, http_status(code), body);
}

json spec_json(const ChallengeSpec &spec, Instant now) {
  json kinds = json::array();
  for (auto k : spec.payload_kinds) kinds.push_back(to_string(k));
  json metrics = json::array();
  for (const auto &m : spec.metrics) metrics.push_back(m.key());
  json upcoming = json::array();
  const Date next = next_open_delivery(spec, now);
  for (int i = 0; i < 3; ++i) {
    const Date d = add_days(next, i);
    upcoming.push_back({{"delivery_date", format_date(d)}, {"gate_closure", format_instant(gate_closure(spec, d))}});
  }
  json j{{"id", spec.id},
         {"title", spec.title},
         {"target_variable", spec.target_variable},
         {"areas", spec.areas},
         {"reference_timezone", spec.reference_timezone},
         {"cadence", "DAILY"},
         {"deadline_local_time", format_time_of_day(spec.deadline_local_time)},
         {"target_offset_days", spec.target_offset_days},
         {"resolution", format_duration(spec.resolution)},
         {"payload_kinds", kinds},
         {"value_range", {spec.value_range.min, spec.value_range.max}},
         {"metrics", metrics},
         {"windows", spec.windows},
         {"freeze_after", format_duration(spec.freeze_after)},
         {"upcoming", upcoming}};
  if (!spec.quantile_levels.empty()) j["quantile_levels"] = spec.quantile_levels;
  if (spec.max_ensemble_members) j["max_ensemble_members"] = *spec.max_ensemble_members;
  return j;
}

json participant_json(const Participant &p) {
  return {{"id", p.id},
          {"display_name", p.display_name},
          {"method_description", p.method_description ? json(*p.method_description) : json(nullptr)},
          {"repo_or_service_link", p.repo_or_service_link ? json(*p.repo_or_service_link) : json(nullptr)},
          {"data_regime", to_string(p.data_regime)},
          {"forecasts_public", p.forecasts_public}};
}

std::optional<std::string> cookie_value(const httplib::Request &req, std::string_view name) {
  const auto header = req.get_header_value("Cookie");
  std::string_view rest(header);
  while (!rest.empty()) {
    auto end = rest.find(';');
    auto part = rest.substr(0, end);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    if (part.size() > name.size() && part.substr(0, name.size()) == name && part[name.size()] == '=')
      return std::string(part.substr(name.size() + 1));
    if (end == std::string_view::npos) break;
    rest.remove_prefix(end + 1);
  }
  return std::nullopt;
}

ProfileUpdate parse_profile(const json &body) {
  if (!body.is_object()) throw Error(Errc::BadValue, "body must be a JSON object");
  ProfileUpdate u;
  auto optional_text = [&](const char *field) -> std::optional<std::optional<std::string>> {
    if (!body.contains(field)) return std::nullopt;
    const auto &v = body.at(field);
    if (v.is_null()) return std::optional<std::string>();
    if (!v.is_string()) throw Error(Errc::BadValue, std::string(field) + " must be a string or null");
    return std::optional<std::string>(v.get<std::string>());
  };
  for (const auto &[key, value] : body.items()) {
    if (key != "method_description" && key != "repo_or_service_link" && key != "data_regime" &&
        key != "forecasts_public")
      throw Error(Errc::BadValue, "unknown field '" + key + "'");
  }
  u.method_description = optional_text("method_description");
  u.repo_or_service_link = optional_text("repo_or_service_link");
  if (u.repo_or_service_link && *u.repo_or_service_link) {
    const auto &link = **u.repo_or_service_link;
    if (link.rfind("http://", 0) != 0 && link.rfind("https://", 0) != 0)
      throw Error(Errc::BadValue, "repo_or_service_link must be an http(s) URL");
  }
  if (body.contains("data_regime")) {
    const auto &v = body.at("data_regime");
    std::optional<DataRegime> r = v.is_string() ? parse_data_regime(v.get<std::string>()) : std::nullopt;
    if (!r) throw Error(Errc::BadValue, "data_regime must be PUBLIC_ONLY, PROPRIETARY or UNDECLARED");
    u.data_regime = r;
  }
  if (body.contains("forecasts_public")) {
    const auto &v = body.at("forecasts_public");
    if (!v.is_boolean()) throw Error(Errc::BadValue, "forecasts_public must be a boolean");
    u.forecasts_public = v.get<bool>();
  }
  return u;
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

struct ApiServer::Impl {
  RegistryHandle &registry;
  Store &store;
  Gateway &gateway;
  Ingestor &ingest;
  Pipeline &pipeline;
  ServerOptions options;
  Clock clock;
  Leaderboard leaderboard;
  httplib::Server http;

  std::mutex session_mutex;
  std::map<std::string, std::pair<std::string, Instant>> sessions;
  std::mutex rate_mutex;
  std::map<std::string, std::pair<std::int64_t, int>> rate;

  std::mutex scheduler_mutex;
  std::condition_variable scheduler_cv;
  bool stopping = false;
  std::thread scheduler;

  Impl(RegistryHandle &r, Store &s, Gateway &g, Ingestor &i, Pipeline &p, ServerOptions o, Clock c)
      : registry(r), store(s), gateway(g), ingest(i), pipeline(p), options(std::move(o)), clock(std::move(c)),
        leaderboard(r, s) {
    routes();
  }

  /// Participant behind an API key or session cookie; counts the request
  /// against the per-credential cap.
  Participant caller(const httplib::Request &req) {
    std::string credential;
    Participant p;
    if (req.has_header("X-Api-Key")) {
      credential = req.get_header_value("X-Api-Key");
      p = gateway.authenticate(credential);
      credential = credential.substr(0, credential.find('.'));
    } else if (auto token = cookie_value(req, kSessionCookie)) {
      std::lock_guard lock(session_mutex);
      auto it = sessions.find(*token);
      if (it == sessions.end() || it->second.second <= clock()) throw Error(Errc::Unauthenticated, "invalid session");
      auto found = store.find_participant(it->second.first);
      if (!found) throw Error(Errc::Unauthenticated, "invalid session");
      p = *found;
      credential = "session:" + *token;
    } else {
      throw Error(Errc::Unauthenticated, "missing X-Api-Key");
    }
    count_request(credential);
    return p;
  }

  void count_request(const std::string &credential) {
    const auto minute = std::chrono::floor<std::chrono::minutes>(clock()).time_since_epoch().count();
    std::lock_guard lock(rate_mutex);
    auto &[window, count] = rate[credential];
    if (window != minute) {
      window = minute;
      count = 0;
    }
    if (++count > options.requests_per_minute) throw RateLimited{};
  }

  void require_admin(const httplib::Request &req) const {
    if (!options.admin_token || req.get_header_value("X-Admin-Token") != *options.admin_token)
      throw Error(Errc::Unauthenticated, "operator token required");
  }

  template <typename Fn>
  httplib::Server::Handler wrap(Fn fn) {
    return [this, fn](const httplib::Request &req, httplib::Response &res) {
      try {
        fn(req, res);
      } catch (const ValidationError &e) {
        send_error(res, e.code(), e.code() == Errc::Validation ? "payload failed validation" : e.what(),
                   e.diagnostics());
      } catch (const Error &e) {
        send_error(res, e.code(), e.code() == Errc::Unauthenticated ? "authentication failed" : e.what());
      } catch (const json::exception &e) {
        send_json(res, 400, {{"error", "BAD_VALUE"}, {"message", std::string("malformed JSON: ") + e.what()}});
      } catch (const RateLimited &) {
        send_json(res, 429, {{"error", "RATE_LIMITED"}, {"message", "request cap exceeded"}});
      } catch (const std::exception &e) {
        log::error("request_failed", {{"path", req.path}, {"what", e.what()}});
        send_json(res, 500, {{"error", "INTERNAL"}, {"message", "internal error"}});
      }
    };
  }

  void routes() {
    http.Get("/v1/challenges", wrap([this](const httplib::Request &, httplib::Response &res) {
      json out = json::array();
      const Instant now = clock();
      for (const auto &spec : registry.get()->specs()) out.push_back(spec_json(spec, now));
      send_json(res, 200, out);
    }));

    http.Get(R"(/v1/challenges/([^/]+))", wrap([this](const httplib::Request &req, httplib::Response &res) {
      auto reg = registry.get();
      const auto *spec = reg->find(req.matches[1].str());
      if (!spec) throw Error(Errc::UnknownChallenge, "unknown challenge '" + req.matches[1].str() + "'");
      send_json(res, 200, spec_json(*spec, clock()));
    }));

    http.Post(R"(/v1/challenges/([^/]+)/areas/([^/]+)/deliveries/([^/]+)/submissions)",
              wrap([this](const httplib::Request &req, httplib::Response &res) {
                const auto participant = caller(req);
                const auto date = parse_date(req.matches[3].str());
                if (!date) throw Error(Errc::UnknownEvent, "invalid delivery date '" + req.matches[3].str() + "'");
                const EventRef ref{req.matches[1].str(), req.matches[2].str(), *date};
                const auto body = json::parse(req.body);
                auto payload = payload_from_json(body);
                if (!payload) {
                  gateway.resolve_event(ref);
                  throw ValidationError(Errc::Validation, payload.diagnostics);
                }
                const auto receipt = gateway.accept_submission(participant.id, ref, *payload);
                send_json(res, 201, {{"submission_id", receipt.submission_id},
                                     {"received_at", format_instant(receipt.received_at)}});
              }));

    http.Post("/v1/session", wrap([this](const httplib::Request &req, httplib::Response &res) {
      std::string key = req.get_header_value("X-Api-Key");
      if (key.empty() && !req.body.empty()) {
        const auto body = json::parse(req.body);
        if (body.contains("api_key") && body["api_key"].is_string()) key = body["api_key"].get<std::string>();
      }
      const auto participant = gateway.authenticate(key);
      unsigned char raw[32];
      randombytes_buf(raw, sizeof raw);
      char hex[sizeof raw * 2 + 1];
      sodium_bin2hex(hex, sizeof hex, raw, sizeof raw);
      {
        std::lock_guard lock(session_mutex);
        sessions[hex] = {participant.id, clock() + kSessionLifetime};
      }
      res.set_header("Set-Cookie", std::string(kSessionCookie) + "=" + hex + "; HttpOnly; SameSite=Strict; Path=/");
      send_json(res, 200, participant_json(participant));
    }));

    http.Get("/v1/me", wrap([this](const httplib::Request &req, httplib::Response &res) {
      send_json(res, 200, participant_json(caller(req)));
    }));

    http.Put("/v1/me", wrap([this](const httplib::Request &req, httplib::Response &res) {
      const auto participant = caller(req);
      const auto update = parse_profile(json::parse(req.body));
      send_json(res, 200, participant_json(gateway.update_profile(participant.id, update)));
    }));

    http.Get("/v1/keys", wrap([this](const httplib::Request &req, httplib::Response &res) {
      const auto participant = caller(req);
      json out = json::array();
      for (const auto &k : store.keys_of(participant.id))
        out.push_back({{"key_id", k.key_id},
                       {"created_at", format_instant(k.created_at)},
                       {"revoked_at", k.revoked_at ? json(format_instant(*k.revoked_at)) : json(nullptr)}});
      send_json(res, 200, out);
    }));

    http.Post("/v1/keys", wrap([this](const httplib::Request &req, httplib::Response &res) {
      const auto participant = caller(req);
      const auto key = gateway.create_key(participant.id);
      send_json(res, 201, {{"key_id", key.key_id}, {"secret", key.secret}});
    }));

    http.Delete(R"(/v1/keys/([^/]+))", wrap([this](const httplib::Request &req, httplib::Response &res) {
      const auto participant = caller(req);
      gateway.revoke_key(participant.id, req.matches[1].str());
      send_json(res, 200, {{"key_id", req.matches[1].str()}, {"revoked", true}});
    }));

    http.Get(R"(/v1/leaderboards/([^/]+)/([^/]+)/series)", wrap([this](const httplib::Request &req,
                                                                        httplib::Response &res) {
      const Instant as_of = as_of_param(req);
      const auto from = parse_date(req.get_param_value("from"));
      const auto to = parse_date(req.get_param_value("to"));
      if (!from || !to) throw Error(Errc::BadValue, "'from' and 'to' must be dates (YYYY-MM-DD)");
      send_json(res, 200,
                leaderboard.series(ingest, req.matches[1].str(), req.matches[2].str(),
                                   split_list(req.get_param_value("participants")), *from, *to, as_of));
    }));

    http.Get(R"(/v1/leaderboards/([^/]+)/([^/]+))", wrap([this](const httplib::Request &req,
                                                                 httplib::Response &res) {
      LeaderboardQuery q;
      q.challenge_id = req.matches[1].str();
      q.area = req.matches[2].str();
      q.as_of = as_of_param(req);
      q.sort_metric = req.get_param_value("sort");
      if (req.has_param("window")) {
        try {
          q.window = std::stoi(req.get_param_value("window"));
        } catch (const std::exception &) {
          throw Error(Errc::UnknownWindow, "window must be an integer");
        }
      } else {
        auto reg = registry.get();
        const auto *spec = reg->find(q.challenge_id);
        if (!spec) throw Error(Errc::UnknownChallenge, "unknown challenge '" + q.challenge_id + "'");
        q.window = spec->windows.front();
      }
      if (req.has_param("regime")) {
        q.data_regime = parse_data_regime(req.get_param_value("regime"));
        if (!q.data_regime) throw Error(Errc::BadValue, "unknown regime '" + req.get_param_value("regime") + "'");
      }
      const auto page = leaderboard.query(q);
      if (req.get_param_value("format") == "csv") {
        res.status = 200;
        res.set_content(page_to_csv(page), "text/csv");
      } else {
        send_json(res, 200, page_to_json(page));
      }
    }));

    http.Get("/v1/admin/ingest/status", wrap([this](const httplib::Request &req, httplib::Response &res) {
      require_admin(req);
      json out = json::array();
      for (const auto &s : store.ingest_statuses())
        out.push_back({{"event", to_string(s.event)},
                       {"completeness", s.completeness},
                       {"stale", s.stale},
                       {"attempts", s.attempts},
                       {"next_attempt_at", s.next_attempt_at ? json(format_instant(*s.next_attempt_at)) : json(nullptr)},
                       {"last_error", s.last_error}});
      send_json(res, 200, out);
    }));

    http.Post("/v1/admin/reload", wrap([this](const httplib::Request &req, httplib::Response &res) {
      require_admin(req);
      auto loaded = Registry::load_directory(options.config_dir);
      if (!loaded) throw ValidationError(Errc::BadValue, loaded.diagnostics);
      registry.replace(*loaded);
      log::info("registry_reloaded", {{"challenges", loaded->specs().size()}});
      send_json(res, 200, {{"challenges", loaded->specs().size()}});
    }));

    http.Post("/v1/admin/tick", wrap([this](const httplib::Request &req, httplib::Response &res) {
      require_admin(req);
      send_json(res, 200, pipeline.tick(clock()).to_json());
    }));

    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });

    http.set_logger([](const httplib::Request &req, const httplib::Response &res) {
      log::debug("http", {{"method", req.method}, {"path", req.path}, {"status", res.status}});
    });
  }

  Instant as_of_param(const httplib::Request &req) const {
    if (!req.has_param("as_of")) return clock();
    auto t = parse_instant(req.get_param_value("as_of"));
    if (!t) throw Error(Errc::BadValue, "as_of must be an RFC 3339 instant");
    return *t;
  }

  void start_scheduler() {
    if (options.tick_interval <= Seconds{0}) return;
    scheduler = std::thread([this] {
      std::unique_lock lock(scheduler_mutex);
      while (!stopping) {
        lock.unlock();
        try {
          pipeline.tick(clock());
        } catch (const std::exception &e) {
          log::error("tick_failed", {{"what", e.what()}});
        }
        lock.lock();
        scheduler_cv.wait_for(lock, options.tick_interval, [this] { return stopping; });
      }
    });
  }
};

ApiServer::ApiServer(RegistryHandle &registry, Store &store, Gateway &gateway, Ingestor &ingest, Pipeline &pipeline,
                     ServerOptions options, Clock clock)
    : impl_(std::make_unique<Impl>(registry, store, gateway, ingest, pipeline, std::move(options), std::move(clock))) {
  if (sodium_init() < 0) throw Error(Errc::Store, "libsodium failed to initialize");
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  auto &o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->http.bind_to_any_port(o.host);
    if (port <= 0) throw Error(Errc::Io, "cannot bind " + o.host);
    o.port = port;
    return port;
  }
  if (!impl_->http.bind_to_port(o.host, o.port))
    throw Error(Errc::Io, "cannot bind " + o.host + ":" + std::to_string(o.port));
  return o.port;
}

void ApiServer::run() {
  impl_->start_scheduler();
  log::info("serving", {{"host", impl_->options.host}, {"port", impl_->options.port}});
  impl_->http.listen_after_bind();
}

void ApiServer::stop() {
  {
    std::lock_guard lock(impl_->scheduler_mutex);
    impl_->stopping = true;
  }
  impl_->scheduler_cv.notify_all();
  impl_->http.stop();
  if (impl_->scheduler.joinable()) impl_->scheduler.join();
}

}  // namespace arena
