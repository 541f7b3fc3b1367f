#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "arena/error.hpp"
#include "arena/time.hpp"

namespace arena {

enum class PayloadKind { Point, Quantile, Ensemble };
enum class MetricName { MAE, RMSE, Pinball, CrpsQuantile, CrpsEnsemble, WIS };
/// Empirical CRPS estimator for ensembles. Only the energy form is built.
enum class EnsembleEstimator { NRG };
enum class SourceKind { FileFixture, Http };
enum class Cadence { Daily };

std::string_view to_string(PayloadKind kind);
std::string_view to_string(MetricName name);
std::string_view to_string(SourceKind kind);
std::optional<PayloadKind> parse_payload_kind(std::string_view text);
std::optional<MetricName> parse_metric_name(std::string_view text);

struct MetricSpec {
  MetricName name = MetricName::MAE;
  /// PINBALL only.
  std::optional<double> tau{};
  /// CRPS_ENSEMBLE only.
  EnsembleEstimator estimator = EnsembleEstimator::NRG;

  /// Stable column/sort key, e.g. "MAE", "PINBALL@0.9".
  std::string key() const;
  bool operator==(const MetricSpec &) const = default;
};

std::optional<MetricSpec> parse_metric_key(std::string_view key);

struct SourceRef {
  SourceKind kind = SourceKind::FileFixture;
  /// Fixture path relative to the data root, or a URL template containing
  /// `{area}`, `{from}` and `{to}`.
  std::string location;
  Seconds publication_lag{0};

  /// Observations of two challenges are shared iff their identities match.
  std::string identity() const;
  bool operator==(const SourceRef &) const = default;
};

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const ValueRange &) const = default;
};

struct ChallengeSpec {
  std::string id;
  std::string title;
  std::string target_variable;
  std::vector<std::string> areas;
  std::string reference_timezone;
  Cadence cadence = Cadence::Daily;
  TimeOfDay deadline_local_time{12, 0};
  int target_offset_days = 1;
  Seconds resolution{3600};
  std::vector<PayloadKind> payload_kinds;
  std::vector<double> quantile_levels;
  std::optional<int> max_ensemble_members;
  ValueRange value_range;
  std::vector<MetricSpec> metrics;
  std::vector<int> windows;
  SourceRef ground_truth_source;
  Seconds freeze_after = std::chrono::days{14};

  bool allows(PayloadKind kind) const;
  bool has_area(std::string_view area) const;
  const MetricSpec *find_metric(std::string_view key) const;
  bool operator==(const ChallengeSpec &) const = default;
};

/// Parses one YAML challenge document. Every violation found is reported,
/// each with a document path.
Validated<ChallengeSpec> parse_challenge(const std::string &config_text);

/// Canonical YAML; `parse_challenge(serialize_challenge(s))` yields `s`.
std::string serialize_challenge(const ChallengeSpec &spec);

/// Diagnostics for a metric that no allowed payload kind can feed.
std::optional<Diagnostic> check_metric_compatibility(const MetricSpec &metric,
                                                     const std::vector<PayloadKind> &kinds,
                                                     const std::vector<double> &levels,
                                                     const std::string &path);

/// True when every level below 0.5 has its mirror `1 - level` and 0.5 is present.
bool is_symmetric_grid_with_median(const std::vector<double> &levels);

struct LeaderboardKey {
  std::string challenge_id;
  std::string area;
  auto operator<=>(const LeaderboardKey &) const = default;
};

Validated<std::vector<LeaderboardKey>> validate_registry(const std::vector<ChallengeSpec> &specs);

/// The set of challenges a deployment serves, plus where fixture data lives.
class Registry {
 public:
  Registry() = default;
  Registry(std::vector<ChallengeSpec> specs, std::filesystem::path data_root = {});

  /// Scans `*.yaml`/`*.yml` in `dir`. Diagnostic paths are prefixed by the file name.
  static Validated<Registry> load_directory(const std::filesystem::path &dir,
                                            std::optional<std::filesystem::path> data_root = {});

  const ChallengeSpec *find(std::string_view id) const;
  const ChallengeSpec &get(std::string_view id) const;
  const std::vector<ChallengeSpec> &specs() const { return specs_; }
  const std::filesystem::path &data_root() const { return data_root_; }
  std::vector<LeaderboardKey> keys() const;

 private:
  std::vector<ChallengeSpec> specs_;
  std::filesystem::path data_root_;
};

/// Thread-safe holder of the current registry; reload swaps it atomically.
class RegistryHandle {
 public:
  explicit RegistryHandle(Registry registry) : current_(std::make_shared<const Registry>(std::move(registry))) {}

  std::shared_ptr<const Registry> get() const {
    std::lock_guard lock(mutex_);
    return current_;
  }
  void replace(Registry registry) {
    auto next = std::make_shared<const Registry>(std::move(registry));
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Registry> current_;
};

}  // namespace arena
