#include "arena/payload.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arena {

Eigen::Index AlignedForecast::slots() const {
  if (point) return point->size();
  if (quantiles) return quantiles->cols();
  if (ensemble) return ensemble->cols();
  return 0;
}

bool AlignedForecast::has(PayloadKind kind) const {
  switch (kind) {
    case PayloadKind::Point: return point.has_value();
    case PayloadKind::Quantile: return quantiles.has_value();
    case PayloadKind::Ensemble: return ensemble.has_value();
  }
  return false;
}

std::optional<Eigen::Index> AlignedForecast::median_row() const {
  if (!quantiles) return std::nullopt;
  for (std::size_t k = 0; k < levels.size(); ++k)
    if (std::abs(levels[k] - 0.5) <= 1e-12) return static_cast<Eigen::Index>(k);
  return std::nullopt;
}

std::optional<Eigen::VectorXd> AlignedForecast::derived_point() const {
  if (point) return *point;
  if (auto row = median_row()) return Eigen::VectorXd(quantiles->row(*row).transpose());
  if (ensemble && ensemble->rows() > 0) return Eigen::VectorXd(ensemble->colwise().mean().transpose());
  return std::nullopt;
}

namespace {

constexpr int kMissing = -1;

class PayloadChecker {
 public:
  PayloadChecker(const ChallengeSpec &spec, const ForecastEvent &event)
      : spec_(spec), grid_(event.target_timestamps) {}

  Diagnostics diags;

  void add(Errc code, std::string path, std::string message, std::optional<Instant> at = {},
           std::optional<double> level = {}) {
    diags.push_back({code, std::move(path), std::move(message),
                     at ? std::optional<std::string>(format_instant(*at)) : std::nullopt, level});
  }

  /// Establishes which grid slot each input position maps to.
  void align(const std::optional<std::vector<Instant>> &timestamps) {
    const auto n = grid_.size();
    if (!timestamps) {
      explicit_ = false;
      return;
    }
    explicit_ = true;
    slot_of_input_.assign(timestamps->size(), kMissing);
    std::vector<bool> covered(n, false);
    for (std::size_t i = 0; i < timestamps->size(); ++i) {
      const Instant t = (*timestamps)[i];
      auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
      const auto path = "timestamps[" + std::to_string(i) + "]";
      if (it == grid_.end() || *it != t) {
        add(Errc::ExtraTimestamp, path, "timestamp is not on the event grid", t);
        continue;
      }
      auto slot = static_cast<std::size_t>(it - grid_.begin());
      if (covered[slot]) {
        add(Errc::ExtraTimestamp, path, "timestamp appears more than once", t);
        continue;
      }
      covered[slot] = true;
      slot_of_input_[i] = static_cast<int>(slot);
    }
    for (std::size_t s = 0; s < n; ++s)
      if (!covered[s]) add(Errc::MissingTimestamp, "timestamps", "no value for grid timestamp", grid_[s]);
  }

  /// Places `values` onto the grid, reporting coverage and value problems.
  /// Missing slots are left as NaN.
  Eigen::VectorXd place(const std::vector<double> &values, const std::string &path,
                        std::optional<double> level = {}) {
    const auto n = grid_.size();
    Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                    std::numeric_limits<double>::quiet_NaN());
    const std::size_t expected = explicit_ ? slot_of_input_.size() : n;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto elem = path + "[" + std::to_string(i) + "]";
      if (i >= expected) {
        add(Errc::ExtraTimestamp, elem, "value beyond the end of the event grid", std::nullopt, level);
        continue;
      }
      const int slot = explicit_ ? slot_of_input_[i] : static_cast<int>(i);
      if (slot == kMissing) continue;
      const Instant at = grid_[static_cast<std::size_t>(slot)];
      const double v = values[i];
      if (!std::isfinite(v)) {
        add(Errc::NonFinite, elem, "value is not finite", at, level);
        continue;
      }
      if (!spec_.value_range.contains(v)) {
        add(Errc::OutOfRange, elem, "value outside the challenge value_range", at, level);
        continue;
      }
      out[slot] = v;
    }
    for (std::size_t i = values.size(); i < expected; ++i) {
      const int slot = explicit_ ? slot_of_input_[i] : static_cast<int>(i);
      std::optional<Instant> at;
      if (slot != kMissing) at = grid_[static_cast<std::size_t>(slot)];
      add(Errc::MissingTimestamp, path + "[" + std::to_string(i) + "]", "no value for grid timestamp",
          at, level);
    }
    return out;
  }

  const std::vector<Instant> &grid() const { return grid_; }

 private:
  const ChallengeSpec &spec_;
  const std::vector<Instant> &grid_;
  std::vector<int> slot_of_input_;
  bool explicit_ = false;
};

}  // namespace

Validated<AlignedForecast> validate_payload(const ChallengeSpec &spec, const ForecastEvent &event,
                                            const ForecastPayload &payload) {
  PayloadChecker check(spec, event);
  AlignedForecast aligned;
  const auto n = static_cast<Eigen::Index>(event.target_timestamps.size());

  if (!payload.point && !payload.quantiles && !payload.ensemble) {
    check.add(Errc::EmptyPayload, "", "payload carries no point, quantiles or ensemble");
    return {std::nullopt, std::move(check.diags)};
  }

  check.align(payload.timestamps);

  if (payload.point) {
    if (!spec.allows(PayloadKind::Point))
      check.add(Errc::KindNotAllowed, "point", "challenge does not accept POINT payloads");
    aligned.point = check.place(*payload.point, "point");
  }

  if (payload.quantiles) {
    const auto &block = *payload.quantiles;
    if (!spec.allows(PayloadKind::Quantile))
      check.add(Errc::KindNotAllowed, "quantiles", "challenge does not accept QUANTILE payloads");
    bool levels_ok = block.levels == spec.quantile_levels;
    if (!levels_ok)
      check.add(Errc::LevelMismatch, "quantiles.levels",
                "declared levels must equal the challenge quantile_levels exactly");
    if (block.values.size() != block.levels.size()) {
      check.add(Errc::LevelMismatch, "quantiles.values",
                "expected one row per declared level, got " + std::to_string(block.values.size()));
      levels_ok = false;
    }
    Eigen::MatrixXd q(static_cast<Eigen::Index>(block.values.size()), n);
    for (std::size_t k = 0; k < block.values.size(); ++k) {
      std::optional<double> level;
      if (k < block.levels.size()) level = block.levels[k];
      q.row(static_cast<Eigen::Index>(k)) =
          check.place(block.values[k], "quantiles.values[" + std::to_string(k) + "]", level).transpose();
    }
    if (levels_ok) {
      for (Eigen::Index k = 1; k < q.rows(); ++k)
        for (Eigen::Index t = 0; t < n; ++t) {
          const double lo = q(k - 1, t), hi = q(k, t);
          if (std::isfinite(lo) && std::isfinite(hi) && hi < lo - kCrossingTolerance)
            check.add(Errc::QuantileCrossing,
                      "quantiles.values[" + std::to_string(k) + "][" + std::to_string(t) + "]",
                      "quantile below the preceding level", check.grid()[static_cast<std::size_t>(t)],
                      block.levels[static_cast<std::size_t>(k)]);
        }
    }
    aligned.levels = block.levels;
    aligned.quantiles = std::move(q);
  }

  if (payload.ensemble) {
    const auto &members = *payload.ensemble;
    if (!spec.allows(PayloadKind::Ensemble))
      check.add(Errc::KindNotAllowed, "ensemble", "challenge does not accept ENSEMBLE payloads");
    if (members.empty())
      check.add(Errc::EmptyPayload, "ensemble", "ensemble has no members");
    if (spec.max_ensemble_members && static_cast<int>(members.size()) > *spec.max_ensemble_members)
      check.add(Errc::TooManyMembers, "ensemble",
                std::to_string(members.size()) + " members exceed max_ensemble_members " +
                    std::to_string(*spec.max_ensemble_members));
    Eigen::MatrixXd e(static_cast<Eigen::Index>(members.size()), n);
    for (std::size_t m = 0; m < members.size(); ++m)
      e.row(static_cast<Eigen::Index>(m)) =
          check.place(members[m], "ensemble[" + std::to_string(m) + "]").transpose();
    aligned.ensemble = std::move(e);
  }

  if (!check.diags.empty()) return {std::nullopt, std::move(check.diags)};
  return {std::move(aligned), {}};
}

namespace {

struct JsonDecoder {
  Diagnostics diags;

  void bad(const std::string &path, const std::string &msg) {
    diags.push_back({Errc::BadValue, path, msg, std::nullopt, std::nullopt});
  }

  std::optional<std::vector<double>> series(const nlohmann::json &node, const std::string &path) {
    if (!node.is_array()) {
      bad(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    out.reserve(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto &v = node[i];
      if (v.is_number()) out.push_back(v.get<double>());
      else if (v.is_null()) out.push_back(std::numeric_limits<double>::quiet_NaN());
      else {
        bad(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    return out;
  }

  std::optional<std::vector<std::vector<double>>> matrix(const nlohmann::json &node,
                                                         const std::string &path) {
    if (!node.is_array()) {
      bad(path, "expected an array of arrays");
      return std::nullopt;
    }
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      auto row = series(node[i], path + "[" + std::to_string(i) + "]");
      out.push_back(row.value_or(std::vector<double>{}));
    }
    return out;
  }
};

}  // namespace

Validated<ForecastPayload> payload_from_json(const nlohmann::json &body) {
  JsonDecoder dec;
  ForecastPayload payload;
  if (!body.is_object()) {
    dec.bad("", "body must be a JSON object");
    return {std::nullopt, std::move(dec.diags)};
  }
  for (const auto &[key, _] : body.items())
    if (key != "point" && key != "quantiles" && key != "ensemble" && key != "timestamps")
      dec.bad(key, "unknown field");

  if (body.contains("timestamps")) {
    const auto &ts = body["timestamps"];
    if (!ts.is_array()) {
      dec.bad("timestamps", "expected an array of RFC 3339 instants");
    } else {
      std::vector<Instant> out;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        std::optional<Instant> t;
        if (ts[i].is_string()) t = parse_instant(ts[i].get<std::string>());
        if (!t) dec.bad("timestamps[" + std::to_string(i) + "]", "expected an RFC 3339 instant");
        else out.push_back(*t);
      }
      payload.timestamps = std::move(out);
    }
  }
  if (body.contains("point") && !body["point"].is_null()) payload.point = dec.series(body["point"], "point");
  if (body.contains("quantiles") && !body["quantiles"].is_null()) {
    const auto &q = body["quantiles"];
    if (!q.is_object() || !q.contains("levels") || !q.contains("values")) {
      dec.bad("quantiles", "expected {levels: [...], values: [[...]]}");
    } else {
      ForecastPayload::QuantileBlock block;
      if (auto levels = dec.series(q["levels"], "quantiles.levels")) block.levels = *levels;
      if (auto values = dec.matrix(q["values"], "quantiles.values")) block.values = *values;
      payload.quantiles = std::move(block);
    }
  }
  if (body.contains("ensemble") && !body["ensemble"].is_null())
    payload.ensemble = dec.matrix(body["ensemble"], "ensemble");

  if (!dec.diags.empty()) return {std::nullopt, std::move(dec.diags)};
  return {std::move(payload), {}};
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json vector_json(const std::vector<double> &v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(number_or_null(x));
  return out;
}

template <typename Derived>
nlohmann::json row_json(const Eigen::DenseBase<Derived> &row) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < row.size(); ++i) out.push_back(number_or_null(row(i)));
  return out;
}

}  // namespace

nlohmann::json payload_to_json(const ForecastPayload &payload) {
  nlohmann::json out = nlohmann::json::object();
  if (payload.timestamps) {
    auto ts = nlohmann::json::array();
    for (auto t : *payload.timestamps) ts.push_back(format_instant(t));
    out["timestamps"] = ts;
  }
  if (payload.point) out["point"] = vector_json(*payload.point);
  if (payload.quantiles) {
    auto values = nlohmann::json::array();
    for (const auto &row : payload.quantiles->values) values.push_back(vector_json(row));
    out["quantiles"] = {{"levels", payload.quantiles->levels}, {"values", values}};
  }
  if (payload.ensemble) {
    auto members = nlohmann::json::array();
    for (const auto &row : *payload.ensemble) members.push_back(vector_json(row));
    out["ensemble"] = members;
  }
  return out;
}

nlohmann::json aligned_to_json(const AlignedForecast &forecast) {
  nlohmann::json out = nlohmann::json::object();
  if (forecast.point) out["point"] = row_json(*forecast.point);
  if (forecast.quantiles) {
    auto values = nlohmann::json::array();
    for (Eigen::Index k = 0; k < forecast.quantiles->rows(); ++k)
      values.push_back(row_json(forecast.quantiles->row(k)));
    out["quantiles"] = {{"levels", forecast.levels}, {"values", values}};
  }
  if (forecast.ensemble) {
    auto members = nlohmann::json::array();
    for (Eigen::Index m = 0; m < forecast.ensemble->rows(); ++m)
      members.push_back(row_json(forecast.ensemble->row(m)));
    out["ensemble"] = members;
  }
  return out;
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json &rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  return m;
}

}  // namespace

AlignedForecast aligned_from_json(const nlohmann::json &doc) {
  AlignedForecast out;
  if (doc.contains("point")) {
    const auto &p = doc["point"];
    Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v[static_cast<Eigen::Index>(i)] = p[i].get<double>();
    out.point = std::move(v);
  }
  if (doc.contains("quantiles")) {
    out.levels = doc["quantiles"]["levels"].get<std::vector<double>>();
    out.quantiles = matrix_from_json(doc["quantiles"]["values"]);
  }
  if (doc.contains("ensemble")) out.ensemble = matrix_from_json(doc["ensemble"]);
  return out;
}

}  // namespace arena
