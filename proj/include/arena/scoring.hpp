#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "arena/challenge.hpp"
#include "arena/error.hpp"
#include "arena/observation.hpp"
#include "arena/payload.hpp"
#include "arena/temporal.hpp"

namespace arena::score {

// All scores are negatively oriented (lower is better) and non-negative.

namespace detail {

template <typename Scalar>
Scalar pairwise_sum_range(const Scalar *data, Eigen::Index n) {
  if (n <= 8) {
    Scalar s(0);
    for (Eigen::Index i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const Eigen::Index half = n / 2;
  return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}

}  // namespace detail

/// Cascade summation; rounding error grows with log(n) instead of n.
template <typename Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived> &v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> flat = v.derived().reshaped();
  return detail::pairwise_sum_range(flat.data(), flat.size());
}

namespace detail {

template <typename DerivedF, typename DerivedY>
void require_same_length(const Eigen::MatrixBase<DerivedF> &f, const Eigen::MatrixBase<DerivedY> &y) {
  if (f.size() != y.size() || f.size() == 0)
    throw Error(Errc::LengthMismatch, "forecast and observation series must have equal length >= 1 (" +
                                          std::to_string(f.size()) + " vs " + std::to_string(y.size()) + ")");
}

template <typename Scalar>
void require_level(Scalar tau) {
  if (!(tau > Scalar(0) && tau < Scalar(1)))
    throw Error(Errc::BadLevel, "quantile level must lie in (0,1)");
}

template <typename Scalar>
Scalar pinball_unchecked(Scalar q, Scalar y, Scalar tau) {
  return y >= q ? tau * (y - q) : (Scalar(1) - tau) * (q - y);
}

template <typename Scalar, typename DerivedQ>
void require_quantile_grid(std::span<const Scalar> levels, const Eigen::MatrixBase<DerivedQ> &q) {
  if (levels.empty() || static_cast<Eigen::Index>(levels.size()) != q.size())
    throw Error(Errc::LengthMismatch, "one quantile value per level is required");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    require_level(levels[k]);
    if (k > 0 && !(levels[k] > levels[k - 1]))
      throw Error(Errc::BadLevel, "quantile levels must be strictly increasing");
    if (k > 0 && q(static_cast<Eigen::Index>(k)) < q(static_cast<Eigen::Index>(k - 1)) - Scalar(kCrossingTolerance))
      throw Error(Errc::Crossing, "quantile values must be non-decreasing in level");
  }
}

}  // namespace detail

template <typename DerivedF, typename DerivedY>
typename DerivedF::Scalar mae(const Eigen::MatrixBase<DerivedF> &f, const Eigen::MatrixBase<DerivedY> &y) {
  detail::require_same_length(f, y);
  return pairwise_sum((f - y).cwiseAbs()) / static_cast<typename DerivedF::Scalar>(f.size());
}

template <typename DerivedF, typename DerivedY>
typename DerivedF::Scalar rmse(const Eigen::MatrixBase<DerivedF> &f, const Eigen::MatrixBase<DerivedY> &y) {
  detail::require_same_length(f, y);
  using std::sqrt;
  return sqrt(pairwise_sum((f - y).array().square()) / static_cast<typename DerivedF::Scalar>(f.size()));
}

/// Quantile (pinball) loss of quantile `q` at level `tau`.
template <typename Scalar>
Scalar pinball(Scalar q, Scalar y, Scalar tau) {
  detail::require_level(tau);
  return detail::pinball_unchecked(q, y, tau);
}

/// CRPS approximated on a quantile grid: twice the mean pinball loss.
template <typename DerivedQ, typename Scalar = typename DerivedQ::Scalar>
Scalar crps_quantile(std::span<const std::type_identity_t<Scalar>> levels, const Eigen::MatrixBase<DerivedQ> &q,
                     std::type_identity_t<Scalar> y) {
  detail::require_quantile_grid(levels, q);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> losses(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k)
    losses(k) = detail::pinball_unchecked(Scalar(q(k)), y, levels[static_cast<std::size_t>(k)]);
  return Scalar(2) * pairwise_sum(losses) / static_cast<Scalar>(q.size());
}

/// Empirical CRPS of an ensemble, energy form:
/// (1/m) sum|x_i - y| - (1/(2 m^2)) sum_i sum_j |x_i - x_j|.
template <typename DerivedX>
typename DerivedX::Scalar crps_ensemble(const Eigen::MatrixBase<DerivedX> &x, typename DerivedX::Scalar y) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index m = x.size();
  if (m == 0) throw Error(Errc::EmptyEnsemble, "ensemble has no members");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sorted = x;
  std::sort(sorted.data(), sorted.data() + m);
  const Scalar md = static_cast<Scalar>(m);
  const Scalar spread_to_obs = pairwise_sum((sorted.array() - y).abs()) / md;
  // sum_i sum_j |x_i - x_j| = 2 sum_i (2i - m + 1) x_(i) over sorted members.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weighted(m);
  for (Eigen::Index i = 0; i < m; ++i) weighted(i) = static_cast<Scalar>(2 * i - m + 1) * sorted(i);
  const Scalar spread_within = pairwise_sum(weighted) / (md * md);
  return std::max(Scalar(0), spread_to_obs - spread_within);
}

/// Interval score of the central (1 - alpha) interval [l, u].
template <typename Scalar>
Scalar interval_score(Scalar l, Scalar u, Scalar alpha, Scalar y) {
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) throw Error(Errc::BadAlpha, "alpha must lie in (0,1)");
  if (l > u) throw Error(Errc::InvertedInterval, "interval lower bound exceeds upper bound");
  const Scalar penalty = Scalar(2) / alpha;
  return (u - l) + penalty * std::max(l - y, Scalar(0)) + penalty * std::max(y - u, Scalar(0));
}

/// Weighted interval score over a grid symmetric about 0.5 that contains 0.5.
template <typename DerivedQ, typename Scalar = typename DerivedQ::Scalar>
Scalar wis(std::span<const std::type_identity_t<Scalar>> levels, const Eigen::MatrixBase<DerivedQ> &q,
           std::type_identity_t<Scalar> y) {
  const auto n = levels.size();
  if (n == 0 || static_cast<Eigen::Index>(n) != q.size())
    throw Error(Errc::LengthMismatch, "one quantile value per level is required");
  for (std::size_t k = 0; k < n; ++k) {
    detail::require_level(levels[k]);
    if (k > 0 && !(levels[k] > levels[k - 1]))
      throw Error(Errc::BadLevel, "quantile levels must be strictly increasing");
  }
  if (n % 2 == 0 || std::abs(levels[n / 2] - Scalar(0.5)) > Scalar(1e-12)) {
    const bool has_median = std::any_of(levels.begin(), levels.end(),
                                        [](Scalar t) { return std::abs(t - Scalar(0.5)) <= Scalar(1e-12); });
    if (!has_median) throw Error(Errc::NoMedian, "WIS needs the 0.5 level");
    throw Error(Errc::AsymmetricGrid, "WIS needs a grid symmetric about 0.5");
  }
  const std::size_t pairs = n / 2;
  for (std::size_t k = 0; k < pairs; ++k)
    if (std::abs(levels[k] + levels[n - 1 - k] - Scalar(1)) > Scalar(1e-9))
      throw Error(Errc::AsymmetricGrid, "WIS needs a grid symmetric about 0.5");

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> terms(static_cast<Eigen::Index>(pairs + 1));
  terms(0) = Scalar(0.5) * std::abs(y - Scalar(q(static_cast<Eigen::Index>(pairs))));
  for (std::size_t k = 0; k < pairs; ++k) {
    const Scalar l = q(static_cast<Eigen::Index>(k));
    const Scalar u = q(static_cast<Eigen::Index>(n - 1 - k));
    if (l > u + Scalar(kCrossingTolerance)) throw Error(Errc::Crossing, "quantile values cross");
    const Scalar alpha = Scalar(2) * levels[k];
    const Scalar penalty = Scalar(2) / alpha;
    // Unchecked interval score: l may exceed u by the crossing tolerance.
    const Scalar is = (u - l) + penalty * std::max(l - y, Scalar(0)) + penalty * std::max(y - u, Scalar(0));
    terms(static_cast<Eigen::Index>(k + 1)) = alpha / Scalar(2) * is;
  }
  const Scalar result = pairwise_sum(terms) / (static_cast<Scalar>(pairs) + Scalar(0.5));
  return std::max(Scalar(0), result);
}

/// Per-timestamp contributions of `metric` for one forecast. MAE contributes
/// absolute errors and RMSE squared errors; the rest contribute their scores.
Eigen::VectorXd slot_contributions(const MetricSpec &metric, const AlignedForecast &forecast,
                                   const Eigen::VectorXd &observed);

/// Event scalar from summed contributions (RMSE takes the square root).
double finalize(const MetricSpec &metric, double total, Eigen::Index slots);

/// Which representation `metric` reads from a forecast, if any is present.
bool can_score(const MetricSpec &metric, const AlignedForecast &forecast);

}  // namespace arena::score

namespace arena {

struct ScoreRecord {
  std::string participant_id;
  EventRef event;
  /// MetricSpec::key()
  std::string metric;
  double value = 0.0;
  /// Sum of per-slot contributions; pooled window aggregates use total/slots.
  double total = 0.0;
  int slots = 0;
  std::string ground_truth_version;
  Instant scored_at;

  bool operator==(const ScoreRecord &) const = default;
};

struct EffectiveForecast {
  std::string participant_id;
  std::int64_t submission_id = 0;
  AlignedForecast forecast;
};

struct EventScores {
  std::vector<ScoreRecord> records;
  /// (participant, metric) pairs that could not be scored, as
  /// NO_COMPATIBLE_REPRESENTATION diagnostics with path "participant/metric".
  Diagnostics skipped;
};

/// Scores every effective forecast on every challenge metric. Throws
/// INCOMPLETE_GROUND_TRUTH unless the view is complete.
EventScores score_event(const ChallengeSpec &spec, const ForecastEvent &event,
                        const std::vector<EffectiveForecast> &forecasts, const GroundTruthView &truth,
                        Instant scored_at);

}  // namespace arena
