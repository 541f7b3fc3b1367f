#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "arena/challenge.hpp"
#include "arena/payload.hpp"
#include "arena/scoring.hpp"
#include "arena/store.hpp"

namespace arena {

using Clock = std::function<Instant()>;

/// Wall clock truncated to seconds. Only the service entry point uses it.
Instant system_now();

struct IssuedKey {
  std::string key_id;
  /// The complete token to present in `X-Api-Key`; shown exactly once.
  std::string secret;
};

struct SubmissionReceipt {
  std::int64_t submission_id = 0;
  Instant received_at;
};

struct ProfileUpdate {
  std::optional<std::optional<std::string>> method_description;
  std::optional<std::optional<std::string>> repo_or_service_link;
  std::optional<DataRegime> data_regime;
  std::optional<bool> forecasts_public;
};

/// Authenticated, validated, append-only intake of forecasts.
class Gateway {
 public:
  Gateway(const RegistryHandle &registry, Store &store, Clock clock = system_now);

  /// Creates a participant; display names are unique per deployment.
  Participant register_participant(const std::string &display_name,
                                   std::optional<std::string> id = std::nullopt);

  IssuedKey create_key(const std::string &participant_id);
  /// Idempotent; NOT_FOUND when the key does not belong to the participant.
  void revoke_key(const std::string &participant_id, const std::string &key_id);
  /// UNAUTHENTICATED for unknown, malformed and revoked keys alike.
  Participant authenticate(const std::string &presented_key) const;

  Participant update_profile(const std::string &participant_id, const ProfileUpdate &update);

  /// Resolves an event reference; UNKNOWN_EVENT when the challenge, area or
  /// date does not exist.
  ForecastEvent resolve_event(const EventRef &ref) const;

  /// Receive time comes from the gateway clock, read under the intake lock.
  SubmissionReceipt accept_submission(const std::string &participant_id, const EventRef &ref,
                                      const ForecastPayload &payload);
  /// As above with an explicit receive time (virtual clocks, replay).
  SubmissionReceipt accept_submission(const std::string &participant_id, const EventRef &ref,
                                      const ForecastPayload &payload, Instant now);

  std::optional<StoredSubmission> effective_submission(const std::string &participant_id,
                                                       const EventRef &ref) const;
  /// Effective forecasts of every participant who submitted for the event.
  std::vector<EffectiveForecast> effective_forecasts(const ForecastEvent &event) const;

  Instant now() const { return clock_(); }

 private:
  SubmissionReceipt accept_locked(const std::string &participant_id, const EventRef &ref,
                                  const ForecastPayload &payload, Instant now);

  const RegistryHandle &registry_;
  Store &store_;
  Clock clock_;
  std::mutex intake_mutex_;
};

}  // namespace arena
