#include "arena/scoring.hpp"

#include "arena/log.hpp"

namespace arena::score {

bool can_score(const MetricSpec &metric, const AlignedForecast &forecast) {
  switch (metric.name) {
    case MetricName::MAE:
    case MetricName::RMSE: return forecast.derived_point().has_value();
    case MetricName::Pinball:
      if (!forecast.quantiles || !metric.tau) return false;
      return std::any_of(forecast.levels.begin(), forecast.levels.end(),
                         [&](double t) { return std::abs(t - *metric.tau) <= 1e-12; });
    case MetricName::CrpsQuantile: return forecast.quantiles.has_value();
    case MetricName::WIS:
      return forecast.quantiles.has_value() && is_symmetric_grid_with_median(forecast.levels);
    case MetricName::CrpsEnsemble: return forecast.ensemble.has_value() && forecast.ensemble->rows() > 0;
  }
  return false;
}

Eigen::VectorXd slot_contributions(const MetricSpec &metric, const AlignedForecast &forecast,
                                   const Eigen::VectorXd &observed) {
  if (!can_score(metric, forecast))
    throw Error(Errc::NoCompatibleRepresentation, "forecast lacks a representation for " + metric.key());
  const Eigen::Index n = observed.size();
  if (forecast.slots() != n)
    throw Error(Errc::LengthMismatch, "forecast and observation grids differ in length");

  Eigen::VectorXd out(n);
  switch (metric.name) {
    case MetricName::MAE: {
      out = (*forecast.derived_point() - observed).cwiseAbs();
      break;
    }
    case MetricName::RMSE: {
      out = (*forecast.derived_point() - observed).array().square().matrix();
      break;
    }
    case MetricName::Pinball: {
      Eigen::Index row = 0;
      while (std::abs(forecast.levels[static_cast<std::size_t>(row)] - *metric.tau) > 1e-12) ++row;
      for (Eigen::Index t = 0; t < n; ++t) out(t) = pinball((*forecast.quantiles)(row, t), observed(t), *metric.tau);
      break;
    }
    case MetricName::CrpsQuantile: {
      std::span<const double> levels(forecast.levels);
      for (Eigen::Index t = 0; t < n; ++t)
        out(t) = crps_quantile(levels, Eigen::VectorXd(forecast.quantiles->col(t)), observed(t));
      break;
    }
    case MetricName::WIS: {
      std::span<const double> levels(forecast.levels);
      for (Eigen::Index t = 0; t < n; ++t)
        out(t) = wis(levels, Eigen::VectorXd(forecast.quantiles->col(t)), observed(t));
      break;
    }
    case MetricName::CrpsEnsemble: {
      for (Eigen::Index t = 0; t < n; ++t)
        out(t) = crps_ensemble(Eigen::VectorXd(forecast.ensemble->col(t)), observed(t));
      break;
    }
  }
  return out;
}

double finalize(const MetricSpec &metric, double total, Eigen::Index slots) {
  if (slots <= 0) throw Error(Errc::LengthMismatch, "cannot score an empty grid");
  const double mean = total / static_cast<double>(slots);
  return metric.name == MetricName::RMSE ? std::sqrt(mean) : mean;
}

}  // namespace arena::score

namespace arena {

EventScores score_event(const ChallengeSpec &spec, const ForecastEvent &event,
                        const std::vector<EffectiveForecast> &forecasts, const GroundTruthView &truth,
                        Instant scored_at) {
  if (!truth.complete() ||
      truth.values.size() != static_cast<Eigen::Index>(event.target_timestamps.size()))
    throw Error(Errc::IncompleteGroundTruth,
                "ground truth for " + to_string(event.ref) + " is " +
                    std::to_string(truth.completeness * 100.0) + "% complete");

  EventScores out;
  for (const auto &entry : forecasts) {
    for (const auto &metric : spec.metrics) {
      if (!score::can_score(metric, entry.forecast)) {
        out.skipped.push_back({Errc::NoCompatibleRepresentation, entry.participant_id + "/" + metric.key(),
                               "submission lacks every representation " + metric.key() + " needs",
                               std::nullopt, std::nullopt});
        continue;
      }
      const Eigen::VectorXd contributions = score::slot_contributions(metric, entry.forecast, truth.values);
      ScoreRecord record;
      record.participant_id = entry.participant_id;
      record.event = event.ref;
      record.metric = metric.key();
      record.total = score::pairwise_sum(contributions);
      record.slots = static_cast<int>(contributions.size());
      record.value = score::finalize(metric, record.total, contributions.size());
      record.ground_truth_version = truth.version_id;
      record.scored_at = scored_at;
      out.records.push_back(std::move(record));
    }
  }
  for (const auto &d : out.skipped)
    log::warn("metric_skipped", {{"event", to_string(event.ref)}, {"what", d.path}, {"code", "NO_COMPATIBLE_REPRESENTATION"}});
  return out;
}

}  // namespace arena
