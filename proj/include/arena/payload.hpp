#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "arena/challenge.hpp"
#include "arena/error.hpp"
#include "arena/temporal.hpp"

namespace arena {

/// A forecast as submitted: possibly ragged, possibly misaligned. Nothing is
/// trusted until `validate_payload` has run against an event grid.
struct ForecastPayload {
  struct QuantileBlock {
    std::vector<double> levels;
    /// levels x timestamps
    std::vector<std::vector<double>> values;
  };

  /// Explicit alignment; when absent series are aligned positionally.
  std::optional<std::vector<Instant>> timestamps;
  std::optional<std::vector<double>> point;
  std::optional<QuantileBlock> quantiles;
  /// members x timestamps
  std::optional<std::vector<std::vector<double>>> ensemble;
};

/// A payload validated against one event grid; every matrix has one column
/// per target timestamp in grid order.
struct AlignedForecast {
  std::optional<Eigen::VectorXd> point;
  std::vector<double> levels;
  /// levels x timestamps
  std::optional<Eigen::MatrixXd> quantiles;
  /// members x timestamps
  std::optional<Eigen::MatrixXd> ensemble;

  Eigen::Index slots() const;
  bool has(PayloadKind kind) const;
  /// Row of the 0.5 level, if the grid has one.
  std::optional<Eigen::Index> median_row() const;
  /// Point series used by MAE/RMSE: the explicit point, else the 0.5
  /// quantile, else the ensemble member-wise mean.
  std::optional<Eigen::VectorXd> derived_point() const;
};

inline constexpr double kCrossingTolerance = 1e-9;

Validated<AlignedForecast> validate_payload(const ChallengeSpec &spec, const ForecastEvent &event,
                                            const ForecastPayload &payload);

/// Decodes the HTTP body shape. JSON `null` entries decode as NaN so they are
/// reported as NON_FINITE by validation rather than as a type error.
Validated<ForecastPayload> payload_from_json(const nlohmann::json &body);
nlohmann::json payload_to_json(const ForecastPayload &payload);

/// Canonical storage form of an aligned forecast (grid order, no timestamps).
nlohmann::json aligned_to_json(const AlignedForecast &forecast);
AlignedForecast aligned_from_json(const nlohmann::json &doc);

}  // namespace arena
