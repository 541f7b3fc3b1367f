#pragma once

#include <chrono>
#include <mutex>

#include <json.hpp>

#include "arena/gateway.hpp"
#include "arena/ingest.hpp"
#include "arena/store.hpp"

namespace arena {

struct TickReport {
  Instant as_of;
  int events_ingested = 0;
  /// (participant, event) pairs scored for the first time.
  int events_scored = 0;
  /// (participant, event) pairs rescored after a revision.
  int events_rescored = 0;
  /// Events newly flagged STALE by this tick.
  int stale_events = 0;
  std::chrono::microseconds duration{0};

  nlohmann::json to_json() const;
};

/// fetch -> upsert -> score newly complete and revised events. Ticks are
/// mutually exclusive.
class Pipeline {
 public:
  Pipeline(const RegistryHandle &registry, Store &store, Gateway &gateway, Ingestor &ingest);

  TickReport tick(Instant as_of);

 private:
  void tick_challenge(const ChallengeSpec &spec, Instant as_of, TickReport &report);

  const RegistryHandle &registry_;
  Store &store_;
  Gateway &gateway_;
  Ingestor &ingest_;
  std::mutex tick_mutex_;
};

}  // namespace arena
