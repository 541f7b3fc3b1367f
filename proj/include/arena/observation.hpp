#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arena/temporal.hpp"
#include "arena/time.hpp"

namespace arena {

/// One stored ground-truth version.
struct Observation {
  std::string area;
  Instant timestamp;
  double value = 0.0;
  Instant version_at;
  /// SourceRef identity the value came from.
  std::string source;
};

/// Latest-version ground truth for one event grid as of some instant.
struct GroundTruthView {
  EventRef event;
  Instant as_of;
  /// Grid-aligned; NaN where no observation is visible.
  Eigen::VectorXd values;
  std::vector<bool> present;
  double completeness = 0.0;
  /// Deterministic digest of the (timestamp -> version_at) map.
  std::string version_id;
  /// Newest version_at contributing to the view.
  Instant latest_version_at{};

  bool complete() const { return completeness == 1.0; }
};

}  // namespace arena
