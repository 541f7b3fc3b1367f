#include "arena/gateway.hpp"

#include <array>

#include <sodium.h>

#include "arena/log.hpp"

namespace arena {

Instant system_now() { return std::chrono::floor<Seconds>(std::chrono::system_clock::now()); }

namespace {

constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kSecretBytes = 32;
constexpr std::size_t kHashBytes = 32;
constexpr std::string_view kKeyPrefix = "ak_";

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error(Errc::Store, "libsodium failed to initialize");
}

std::string to_hex(const unsigned char *data, std::size_t n) {
  std::string out(n * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data, n);
  out.pop_back();
  return out;
}

std::optional<std::vector<unsigned char>> from_hex(std::string_view hex, std::size_t expected) {
  std::vector<unsigned char> out(expected);
  std::size_t len = 0;
  if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len, nullptr) != 0 ||
      len != expected)
    return std::nullopt;
  return out;
}

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  randombytes_buf(buf.data(), buf.size());
  return to_hex(buf.data(), buf.size());
}

std::array<unsigned char, kHashBytes> salted_hash(const std::vector<unsigned char> &salt, std::string_view secret) {
  std::array<unsigned char, kHashBytes> out{};
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char *>(secret.data()), secret.size(),
                     salt.data(), salt.size());
  return out;
}

Error unauthenticated() { return Error(Errc::Unauthenticated, "invalid API key"); }

}  // namespace

Gateway::Gateway(const RegistryHandle &registry, Store &store, Clock clock)
    : registry_(registry), store_(store), clock_(std::move(clock)) {
  ensure_sodium();
}

Participant Gateway::register_participant(const std::string &display_name, std::optional<std::string> id) {
  if (display_name.empty()) throw Error(Errc::BadValue, "display_name must not be empty");
  Participant p;
  p.id = id.value_or("p_" + random_hex(6));
  p.display_name = display_name;
  store_.transaction([&] {
    if (store_.find_participant_by_name(display_name))
      throw Error(Errc::BadValue, "display_name '" + display_name + "' is already taken");
    if (store_.find_participant(p.id)) throw Error(Errc::BadValue, "participant id '" + p.id + "' exists");
    store_.insert_participant(p);
  });
  return p;
}

IssuedKey Gateway::create_key(const std::string &participant_id) {
  if (!store_.find_participant(participant_id))
    throw Error(Errc::NotFound, "unknown participant '" + participant_id + "'");
  std::vector<unsigned char> salt(kSaltBytes);
  randombytes_buf(salt.data(), salt.size());
  const std::string key_id = random_hex(8);
  const std::string secret = random_hex(kSecretBytes);
  const auto hash = salted_hash(salt, secret);

  ApiKeyRecord record{key_id, participant_id, to_hex(salt.data(), salt.size()), to_hex(hash.data(), hash.size()),
                      clock_(), std::nullopt};
  store_.insert_key(record);
  log::info("api_key_created", {{"participant", participant_id}, {"key_id", key_id}});
  return {key_id, std::string(kKeyPrefix) + key_id + "." + secret};
}

void Gateway::revoke_key(const std::string &participant_id, const std::string &key_id) {
  auto key = store_.find_key(key_id);
  if (!key || key->participant_id != participant_id)
    throw Error(Errc::NotFound, "no key '" + key_id + "' for this participant");
  if (!key->revoked_at) {
    store_.set_key_revoked(key_id, clock_());
    log::info("api_key_revoked", {{"participant", participant_id}, {"key_id", key_id}});
  }
}

Participant Gateway::authenticate(const std::string &presented_key) const {
  static const std::vector<unsigned char> dummy_salt(kSaltBytes, 0);
  std::string_view token(presented_key);
  const auto dot = token.find('.');
  if (token.substr(0, kKeyPrefix.size()) != kKeyPrefix || dot == std::string_view::npos) {
    salted_hash(dummy_salt, token);
    throw unauthenticated();
  }
  const std::string key_id(token.substr(kKeyPrefix.size(), dot - kKeyPrefix.size()));
  const std::string_view secret = token.substr(dot + 1);

  auto key = store_.find_key(key_id);
  if (!key) {
    salted_hash(dummy_salt, secret);
    throw unauthenticated();
  }
  auto salt = from_hex(key->salt_hex, kSaltBytes);
  auto expected = from_hex(key->secret_hash_hex, kHashBytes);
  if (!salt || !expected) throw unauthenticated();
  const auto actual = salted_hash(*salt, secret);
  const bool match = sodium_memcmp(actual.data(), expected->data(), kHashBytes) == 0;
  if (!match || key->revoked_at) throw unauthenticated();
  auto participant = store_.find_participant(key->participant_id);
  if (!participant) throw unauthenticated();
  return *participant;
}

Participant Gateway::update_profile(const std::string &participant_id, const ProfileUpdate &update) {
  Participant p;
  store_.transaction([&] {
    auto current = store_.find_participant(participant_id);
    if (!current) throw Error(Errc::NotFound, "unknown participant '" + participant_id + "'");
    p = *current;
    if (update.method_description) p.method_description = *update.method_description;
    if (update.repo_or_service_link) p.repo_or_service_link = *update.repo_or_service_link;
    if (update.data_regime) p.data_regime = *update.data_regime;
    if (update.forecasts_public) p.forecasts_public = *update.forecasts_public;
    store_.update_participant(p);
  });
  return p;
}

ForecastEvent Gateway::resolve_event(const EventRef &ref) const {
  auto registry = registry_.get();
  const auto *spec = registry->find(ref.challenge_id);
  if (!spec) throw Error(Errc::UnknownEvent, "unknown challenge '" + ref.challenge_id + "'");
  if (!spec->has_area(ref.area))
    throw Error(Errc::UnknownEvent, "challenge '" + ref.challenge_id + "' has no area '" + ref.area + "'");
  if (!ref.delivery_date.ok()) throw Error(Errc::UnknownEvent, "invalid delivery date");
  return make_event(*spec, ref.area, ref.delivery_date);
}

SubmissionReceipt Gateway::accept_submission(const std::string &participant_id, const EventRef &ref,
                                             const ForecastPayload &payload) {
  std::lock_guard lock(intake_mutex_);
  return accept_locked(participant_id, ref, payload, clock_());
}

SubmissionReceipt Gateway::accept_submission(const std::string &participant_id, const EventRef &ref,
                                             const ForecastPayload &payload, Instant now) {
  std::lock_guard lock(intake_mutex_);
  return accept_locked(participant_id, ref, payload, now);
}

SubmissionReceipt Gateway::accept_locked(const std::string &participant_id, const EventRef &ref,
                                         const ForecastPayload &payload, Instant now) {
  auto registry = registry_.get();
  const ForecastEvent event = resolve_event(ref);
  if (!is_open(event, now))
    throw Error(Errc::GateClosed, "gate closed at " + format_instant(event.gate_closure) + " for " +
                                      to_string(ref));
  auto validated = validate_payload(registry->get(ref.challenge_id), event, payload);
  if (!validated) throw ValidationError(Errc::Validation, std::move(validated.diagnostics));

  const std::string canonical = aligned_to_json(*validated.value).dump();
  const auto id = store_.append_submission(participant_id, ref, canonical, now);
  log::info("submission_accepted", {{"participant", participant_id},
                                    {"event", to_string(ref)},
                                    {"submission_id", id},
                                    {"received_at", format_instant(now)}});
  return {id, now};
}

std::optional<StoredSubmission> Gateway::effective_submission(const std::string &participant_id,
                                                              const EventRef &ref) const {
  const ForecastEvent event = resolve_event(ref);
  return store_.effective_submission(participant_id, ref, event.gate_closure);
}

std::vector<EffectiveForecast> Gateway::effective_forecasts(const ForecastEvent &event) const {
  std::vector<EffectiveForecast> out;
  for (const auto &participant : store_.submitters(event.ref)) {
    auto sub = store_.effective_submission(participant, event.ref, event.gate_closure);
    if (!sub) continue;
    out.push_back({participant, sub->id, aligned_from_json(nlohmann::json::parse(sub->payload_json))});
  }
  return out;
}

}  // namespace arena
