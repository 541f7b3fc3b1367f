#include "arena/challenge.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "arena/timezone.hpp"

namespace arena {

std::string_view to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::Point: return "POINT";
    case PayloadKind::Quantile: return "QUANTILE";
    case PayloadKind::Ensemble: return "ENSEMBLE";
  }
  return "";
}

std::string_view to_string(MetricName name) {
  switch (name) {
    case MetricName::MAE: return "MAE";
    case MetricName::RMSE: return "RMSE";
    case MetricName::Pinball: return "PINBALL";
    case MetricName::CrpsQuantile: return "CRPS_QUANTILE";
    case MetricName::CrpsEnsemble: return "CRPS_ENSEMBLE";
    case MetricName::WIS: return "WIS";
  }
  return "";
}

std::string_view to_string(SourceKind kind) {
  return kind == SourceKind::FileFixture ? "FILE_FIXTURE" : "HTTP";
}

std::optional<PayloadKind> parse_payload_kind(std::string_view text) {
  for (auto k : {PayloadKind::Point, PayloadKind::Quantile, PayloadKind::Ensemble})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::optional<MetricName> parse_metric_name(std::string_view text) {
  for (auto m : {MetricName::MAE, MetricName::RMSE, MetricName::Pinball, MetricName::CrpsQuantile,
                 MetricName::CrpsEnsemble, MetricName::WIS})
    if (to_string(m) == text) return m;
  return std::nullopt;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string MetricSpec::key() const {
  std::string out(to_string(name));
  if (name == MetricName::Pinball && tau) out += "@" + shortest(*tau);
  return out;
}

std::optional<MetricSpec> parse_metric_key(std::string_view key) {
  auto at = key.find('@');
  auto name = parse_metric_name(key.substr(0, at));
  if (!name) return std::nullopt;
  MetricSpec metric{*name, std::nullopt, EnsembleEstimator::NRG};
  if (*name == MetricName::Pinball) {
    if (at == std::string_view::npos) return std::nullopt;
    double tau = 0;
    auto rest = key.substr(at + 1);
    auto res = std::from_chars(rest.data(), rest.data() + rest.size(), tau);
    if (res.ec != std::errc{} || res.ptr != rest.data() + rest.size()) return std::nullopt;
    metric.tau = tau;
  } else if (at != std::string_view::npos) {
    return std::nullopt;
  }
  return metric;
}

std::string SourceRef::identity() const { return std::string(to_string(kind)) + ":" + location; }

bool ChallengeSpec::allows(PayloadKind kind) const {
  return std::find(payload_kinds.begin(), payload_kinds.end(), kind) != payload_kinds.end();
}

bool ChallengeSpec::has_area(std::string_view area) const {
  return std::find(areas.begin(), areas.end(), area) != areas.end();
}

const MetricSpec *ChallengeSpec::find_metric(std::string_view key) const {
  for (const auto &m : metrics)
    if (m.key() == key) return &m;
  return nullptr;
}

bool is_symmetric_grid_with_median(const std::vector<double> &levels) {
  constexpr double tol = 1e-9;
  bool median = false;
  for (double tau : levels) {
    if (std::abs(tau - 0.5) <= tol) {
      median = true;
      continue;
    }
    bool mirrored = std::any_of(levels.begin(), levels.end(),
                                [&](double other) { return std::abs(tau + other - 1.0) <= tol; });
    if (!mirrored) return false;
  }
  return median;
}

std::optional<Diagnostic> check_metric_compatibility(const MetricSpec &metric,
                                                     const std::vector<PayloadKind> &kinds,
                                                     const std::vector<double> &levels,
                                                     const std::string &path) {
  auto has = [&](PayloadKind k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
  const std::string name(to_string(metric.name));
  switch (metric.name) {
    case MetricName::MAE:
    case MetricName::RMSE:
      // A point series can be derived from a median or an ensemble mean.
      if (has(PayloadKind::Point) || has(PayloadKind::Ensemble)) return std::nullopt;
      if (has(PayloadKind::Quantile) &&
          std::any_of(levels.begin(), levels.end(), [](double t) { return std::abs(t - 0.5) <= 1e-12; }))
        return std::nullopt;
      return Diagnostic{Errc::IncompatibleMetric, path,
                        name + " needs POINT, ENSEMBLE, or QUANTILE with level 0.5"};
    case MetricName::Pinball:
      if (!has(PayloadKind::Quantile))
        return Diagnostic{Errc::IncompatibleMetric, path, "PINBALL needs QUANTILE payloads"};
      if (metric.tau && std::none_of(levels.begin(), levels.end(),
                                     [&](double t) { return std::abs(t - *metric.tau) <= 1e-12; }))
        return Diagnostic{Errc::IncompatibleMetric, path,
                          "PINBALL level " + shortest(*metric.tau) + " is not in quantile_levels"};
      return std::nullopt;
    case MetricName::CrpsQuantile:
      if (!has(PayloadKind::Quantile))
        return Diagnostic{Errc::IncompatibleMetric, path, "CRPS_QUANTILE needs QUANTILE payloads"};
      return std::nullopt;
    case MetricName::WIS:
      if (!has(PayloadKind::Quantile))
        return Diagnostic{Errc::IncompatibleMetric, path, "WIS needs QUANTILE payloads"};
      if (!is_symmetric_grid_with_median(levels))
        return Diagnostic{Errc::IncompatibleMetric, path,
                          "WIS needs a symmetric quantile grid containing 0.5"};
      return std::nullopt;
    case MetricName::CrpsEnsemble:
      if (!has(PayloadKind::Ensemble))
        return Diagnostic{Errc::IncompatibleMetric, path, "CRPS_ENSEMBLE needs ENSEMBLE payloads"};
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

/// Collects diagnostics while walking one YAML document.
class Reader {
 public:
  Diagnostics diags;

  void bad(const std::string &path, const std::string &msg) {
    diags.push_back({Errc::BadValue, path, msg, std::nullopt, std::nullopt});
  }
  void missing(const std::string &path) {
    diags.push_back({Errc::MissingField, path, "required field is missing", std::nullopt,
                     std::nullopt});
  }

  std::optional<std::string> scalar(const YAML::Node &node, const std::string &path) {
    if (!node.IsScalar()) {
      bad(path, "expected a scalar");
      return std::nullopt;
    }
    return node.Scalar();
  }

  std::optional<double> number(const YAML::Node &node, const std::string &path) {
    auto text = scalar(node, path);
    if (!text) return std::nullopt;
    double v = 0;
    if (!YAML::convert<double>::decode(node, v) || !std::isfinite(v)) {
      bad(path, "expected a finite number, got '" + *text + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<int> integer(const YAML::Node &node, const std::string &path) {
    auto text = scalar(node, path);
    if (!text) return std::nullopt;
    int v = 0;
    auto res = std::from_chars(text->data(), text->data() + text->size(), v);
    if (res.ec != std::errc{} || res.ptr != text->data() + text->size()) {
      bad(path, "expected an integer, got '" + *text + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<Seconds> duration(const YAML::Node &node, const std::string &path) {
    auto text = scalar(node, path);
    if (!text) return std::nullopt;
    auto d = parse_duration(*text);
    if (!d) bad(path, "expected an ISO-8601 duration such as PT1H, got '" + *text + "'");
    return d;
  }

  bool sequence(const YAML::Node &node, const std::string &path) {
    if (!node.IsSequence()) {
      bad(path, "expected a list");
      return false;
    }
    return true;
  }
};

const std::set<std::string> kKnownFields = {
    "id",          "title",           "target_variable",      "areas",
    "reference_timezone", "cadence",  "deadline_local_time",  "target_offset_days",
    "resolution",  "payload_kinds",   "quantile_levels",      "max_ensemble_members",
    "value_range", "metrics",         "windows",              "ground_truth_source",
    "freeze_after"};

bool is_slug(const std::string &s) {
  if (s.empty() || !(std::islower(static_cast<unsigned char>(s[0])) ||
                     std::isdigit(static_cast<unsigned char>(s[0]))))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '-' || c == '_';
  });
}

std::optional<MetricSpec> read_metric(Reader &r, const YAML::Node &node, const std::string &path) {
  std::string name_text;
  MetricSpec metric;
  bool has_tau = false;
  if (node.IsScalar()) {
    name_text = node.Scalar();
  } else if (node.IsMap()) {
    if (!node["name"]) {
      r.missing(path + ".name");
      return std::nullopt;
    }
    auto n = r.scalar(node["name"], path + ".name");
    if (!n) return std::nullopt;
    name_text = *n;
    for (const auto &kv : node) {
      auto key = kv.first.Scalar();
      if (key != "name" && key != "tau" && key != "estimator")
        r.bad(path + "." + key, "unknown metric parameter");
    }
    if (node["tau"]) {
      has_tau = true;
      metric.tau = r.number(node["tau"], path + ".tau");
    }
    if (node["estimator"]) {
      auto est = r.scalar(node["estimator"], path + ".estimator");
      if (est && *est != "NRG") r.bad(path + ".estimator", "only the NRG estimator is supported");
    }
  } else {
    r.bad(path, "expected a metric name or a map with 'name'");
    return std::nullopt;
  }
  auto name = parse_metric_name(name_text);
  if (!name) {
    r.bad(path, "unsupported metric '" + name_text + "'");
    return std::nullopt;
  }
  metric.name = *name;
  if (metric.name == MetricName::Pinball) {
    if (!has_tau) {
      r.missing(path + ".tau");
      return std::nullopt;
    }
    if (!metric.tau) return std::nullopt;
    if (!(*metric.tau > 0.0 && *metric.tau < 1.0)) {
      r.bad(path + ".tau", "tau must lie in (0,1)");
      return std::nullopt;
    }
  } else if (has_tau) {
    r.bad(path + ".tau", "tau applies to PINBALL only");
    return std::nullopt;
  }
  return metric;
}

void read_source(Reader &r, const YAML::Node &node, ChallengeSpec &spec) {
  const std::string base = "ground_truth_source";
  if (!node.IsMap()) {
    r.bad(base, "expected a map with kind, location, publication_lag");
    return;
  }
  for (const auto &kv : node) {
    auto key = kv.first.Scalar();
    if (key != "kind" && key != "location" && key != "publication_lag")
      r.bad(base + "." + key, "unknown field");
  }
  bool kind_ok = false;
  if (!node["kind"]) r.missing(base + ".kind");
  else if (auto kind = r.scalar(node["kind"], base + ".kind")) {
    if (*kind == "FILE_FIXTURE") spec.ground_truth_source.kind = SourceKind::FileFixture, kind_ok = true;
    else if (*kind == "HTTP") spec.ground_truth_source.kind = SourceKind::Http, kind_ok = true;
    else r.bad(base + ".kind", "expected FILE_FIXTURE or HTTP");
  }
  if (!node["location"]) r.missing(base + ".location");
  else if (auto loc = r.scalar(node["location"], base + ".location")) {
    spec.ground_truth_source.location = *loc;
    if (loc->empty()) r.bad(base + ".location", "must not be empty");
    else if (kind_ok && spec.ground_truth_source.kind == SourceKind::Http) {
      for (const char *ph : {"{area}", "{from}", "{to}"})
        if (loc->find(ph) == std::string::npos)
          r.bad(base + ".location", std::string("HTTP template lacks placeholder ") + ph);
      if (loc->rfind("http://", 0) != 0 && loc->rfind("https://", 0) != 0)
        r.bad(base + ".location", "HTTP location must be an http(s) URL");
    } else if (kind_ok) {
      std::filesystem::path p(*loc);
      bool escapes = std::any_of(p.begin(), p.end(), [](const auto &part) { return part == ".."; });
      if (p.is_absolute() || escapes)
        r.bad(base + ".location", "fixture path must be relative to the data root");
    }
  }
  if (node["publication_lag"]) {
    if (auto lag = r.duration(node["publication_lag"], base + ".publication_lag")) {
      if (lag->count() < 0) r.bad(base + ".publication_lag", "must not be negative");
      spec.ground_truth_source.publication_lag = *lag;
    }
  }
}

}  // namespace

Validated<ChallengeSpec> parse_challenge(const std::string &config_text) {
  Validated<ChallengeSpec> out;
  YAML::Node doc;
  try {
    doc = YAML::Load(config_text);
  } catch (const YAML::Exception &e) {
    out.diagnostics.push_back({Errc::Syntax, "line " + std::to_string(e.mark.line + 1),
                               e.msg, std::nullopt, std::nullopt});
    return out;
  }
  if (!doc.IsMap()) {
    out.diagnostics.push_back(
        {Errc::Syntax, "", "challenge document must be a mapping", std::nullopt, std::nullopt});
    return out;
  }

  Reader r;
  ChallengeSpec spec;
  spec.payload_kinds.clear();

  for (const auto &kv : doc) {
    auto key = kv.first.IsScalar() ? kv.first.Scalar() : std::string("?");
    if (!kKnownFields.count(key)) r.bad(key, "unknown field");
  }

  auto required = [&](const char *field) -> YAML::Node {
    YAML::Node node = doc[field];
    if (!node || node.IsNull()) {
      r.missing(field);
      return YAML::Node();
    }
    return node;
  };

  if (auto n = required("id"); n.IsDefined()) {
    if (auto s = r.scalar(n, "id")) {
      spec.id = *s;
      if (!is_slug(*s)) r.bad("id", "id must be a lowercase slug ([a-z0-9][a-z0-9_-]*)");
    }
  }
  if (auto n = required("title"); n.IsDefined())
    if (auto s = r.scalar(n, "title")) spec.title = *s;
  if (auto n = required("target_variable"); n.IsDefined()) {
    if (auto s = r.scalar(n, "target_variable")) {
      spec.target_variable = *s;
      if (s->empty()) r.bad("target_variable", "must not be empty");
    }
  }

  if (auto n = required("areas"); n.IsDefined() && r.sequence(n, "areas")) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < n.size(); ++i) {
      auto path = "areas[" + std::to_string(i) + "]";
      auto s = r.scalar(n[i], path);
      if (!s) continue;
      if (s->empty()) r.bad(path, "area code must not be empty");
      else if (!seen.insert(*s).second) r.bad(path, "duplicate area '" + *s + "'");
      spec.areas.push_back(*s);
    }
    if (n.size() == 0) r.bad("areas", "at least one area is required");
  }

  if (auto n = required("reference_timezone"); n.IsDefined()) {
    if (auto s = r.scalar(n, "reference_timezone")) {
      spec.reference_timezone = *s;
      if (!TimeZone::is_known(*s)) r.bad("reference_timezone", "unknown IANA timezone '" + *s + "'");
    }
  }

  if (auto n = doc["cadence"]; n && !n.IsNull()) {
    if (auto s = r.scalar(n, "cadence"); s && *s != "DAILY")
      r.bad("cadence", "only DAILY cadence is supported");
  }

  if (auto n = required("deadline_local_time"); n.IsDefined()) {
    if (auto s = r.scalar(n, "deadline_local_time")) {
      if (auto t = parse_time_of_day(*s)) spec.deadline_local_time = *t;
      else r.bad("deadline_local_time", "expected HH:MM, got '" + *s + "'");
    }
  }

  if (auto n = doc["target_offset_days"]; n && !n.IsNull()) {
    if (auto v = r.integer(n, "target_offset_days")) {
      spec.target_offset_days = *v;
      if (*v < 1) r.bad("target_offset_days", "must be >= 1");
    }
  }

  if (auto n = required("resolution"); n.IsDefined()) {
    if (auto d = r.duration(n, "resolution")) {
      spec.resolution = *d;
      if (d->count() <= 0 || 86400 % d->count() != 0)
        r.bad("resolution", "resolution must evenly divide 24 hours");
    }
  }

  if (auto n = required("payload_kinds"); n.IsDefined() && r.sequence(n, "payload_kinds")) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      auto path = "payload_kinds[" + std::to_string(i) + "]";
      auto s = r.scalar(n[i], path);
      if (!s) continue;
      auto kind = parse_payload_kind(*s);
      if (!kind) r.bad(path, "expected POINT, QUANTILE or ENSEMBLE");
      else if (spec.allows(*kind)) r.bad(path, "duplicate payload kind");
      else spec.payload_kinds.push_back(*kind);
    }
    if (n.size() == 0) r.bad("payload_kinds", "at least one payload kind is required");
  }

  const bool quantile = spec.allows(PayloadKind::Quantile);
  const bool ensemble = spec.allows(PayloadKind::Ensemble);

  if (auto n = doc["quantile_levels"]; n && !n.IsNull()) {
    if (!quantile) r.bad("quantile_levels", "only allowed when QUANTILE is a payload kind");
    if (r.sequence(n, "quantile_levels")) {
      bool all_ok = true;
      for (std::size_t i = 0; i < n.size(); ++i) {
        auto path = "quantile_levels[" + std::to_string(i) + "]";
        auto v = r.number(n[i], path);
        if (!v) {
          all_ok = false;
          continue;
        }
        if (!(*v > 0.0 && *v < 1.0)) r.bad(path, "level must lie in (0,1)"), all_ok = false;
        spec.quantile_levels.push_back(*v);
      }
      if (n.size() == 0) r.bad("quantile_levels", "at least one level is required");
      if (all_ok && std::adjacent_find(spec.quantile_levels.begin(), spec.quantile_levels.end(),
                                       std::greater_equal<>()) != spec.quantile_levels.end())
        r.bad("quantile_levels", "levels must be strictly increasing");
    }
  } else if (quantile) {
    r.missing("quantile_levels");
  }

  if (auto n = doc["max_ensemble_members"]; n && !n.IsNull()) {
    if (!ensemble) r.bad("max_ensemble_members", "only allowed when ENSEMBLE is a payload kind");
    if (auto v = r.integer(n, "max_ensemble_members")) {
      spec.max_ensemble_members = *v;
      if (*v < 1) r.bad("max_ensemble_members", "must be >= 1");
    }
  } else if (ensemble) {
    r.missing("max_ensemble_members");
  }

  if (auto n = required("value_range"); n.IsDefined() && r.sequence(n, "value_range")) {
    if (n.size() != 2) {
      r.bad("value_range", "expected [min, max]");
    } else {
      auto lo = r.number(n[0], "value_range[0]");
      auto hi = r.number(n[1], "value_range[1]");
      if (lo && hi) {
        spec.value_range = {*lo, *hi};
        if (!(*lo < *hi)) r.bad("value_range", "min must be strictly less than max");
      }
    }
  }

  if (auto n = required("metrics"); n.IsDefined() && r.sequence(n, "metrics")) {
    std::set<std::string> keys;
    for (std::size_t i = 0; i < n.size(); ++i) {
      auto path = "metrics[" + std::to_string(i) + "]";
      auto metric = read_metric(r, n[i], path);
      if (!metric) continue;
      if (!keys.insert(metric->key()).second) {
        r.bad(path, "duplicate metric " + metric->key());
        continue;
      }
      spec.metrics.push_back(*metric);
      if (!spec.payload_kinds.empty())
        if (auto d = check_metric_compatibility(*metric, spec.payload_kinds, spec.quantile_levels, path))
          r.diags.push_back(*d);
    }
    if (n.size() == 0) r.bad("metrics", "at least one metric is required");
  }

  if (auto n = required("windows"); n.IsDefined() && r.sequence(n, "windows")) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      auto path = "windows[" + std::to_string(i) + "]";
      auto v = r.integer(n[i], path);
      if (!v) continue;
      if (*v < 1) r.bad(path, "window length must be a positive integer");
      else if (!spec.windows.empty() && *v <= spec.windows.back())
        r.bad(path, "windows must be strictly increasing");
      spec.windows.push_back(*v);
    }
    if (n.size() == 0) r.bad("windows", "at least one window is required");
  }

  if (auto n = required("ground_truth_source"); n.IsDefined()) read_source(r, n, spec);

  if (auto n = doc["freeze_after"]; n && !n.IsNull()) {
    if (auto d = r.duration(n, "freeze_after")) {
      spec.freeze_after = *d;
      if (d->count() < 0) r.bad("freeze_after", "must not be negative");
    }
  }

  out.diagnostics = std::move(r.diags);
  if (out.diagnostics.empty()) out.value = std::move(spec);
  return out;
}

std::string serialize_challenge(const ChallengeSpec &spec) {
  YAML::Emitter e;
  auto num = [](double v) { return shortest(v); };
  e << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << spec.id;
  e << YAML::Key << "title" << YAML::Value << YAML::DoubleQuoted << spec.title;
  e << YAML::Key << "target_variable" << YAML::Value << spec.target_variable;
  e << YAML::Key << "areas" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto &a : spec.areas) e << YAML::DoubleQuoted << a;
  e << YAML::EndSeq;
  e << YAML::Key << "reference_timezone" << YAML::Value << spec.reference_timezone;
  e << YAML::Key << "cadence" << YAML::Value << "DAILY";
  e << YAML::Key << "deadline_local_time" << YAML::Value << YAML::DoubleQuoted
    << format_time_of_day(spec.deadline_local_time);
  e << YAML::Key << "target_offset_days" << YAML::Value << spec.target_offset_days;
  e << YAML::Key << "resolution" << YAML::Value << format_duration(spec.resolution);
  e << YAML::Key << "payload_kinds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto k : spec.payload_kinds) e << std::string(to_string(k));
  e << YAML::EndSeq;
  if (!spec.quantile_levels.empty()) {
    e << YAML::Key << "quantile_levels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double l : spec.quantile_levels) e << num(l);
    e << YAML::EndSeq;
  }
  if (spec.max_ensemble_members)
    e << YAML::Key << "max_ensemble_members" << YAML::Value << *spec.max_ensemble_members;
  e << YAML::Key << "value_range" << YAML::Value << YAML::Flow << YAML::BeginSeq
    << num(spec.value_range.min) << num(spec.value_range.max) << YAML::EndSeq;
  e << YAML::Key << "metrics" << YAML::Value << YAML::BeginSeq;
  for (const auto &m : spec.metrics) {
    if (m.tau) {
      e << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value
        << std::string(to_string(m.name)) << YAML::Key << "tau" << YAML::Value << num(*m.tau)
        << YAML::EndMap;
    } else {
      e << std::string(to_string(m.name));
    }
  }
  e << YAML::EndSeq;
  e << YAML::Key << "windows" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int w : spec.windows) e << w;
  e << YAML::EndSeq;
  e << YAML::Key << "ground_truth_source" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << std::string(to_string(spec.ground_truth_source.kind));
  e << YAML::Key << "location" << YAML::Value << YAML::DoubleQuoted
    << spec.ground_truth_source.location;
  e << YAML::Key << "publication_lag" << YAML::Value
    << format_duration(spec.ground_truth_source.publication_lag);
  e << YAML::EndMap;
  e << YAML::Key << "freeze_after" << YAML::Value << format_duration(spec.freeze_after);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

Validated<std::vector<LeaderboardKey>> validate_registry(const std::vector<ChallengeSpec> &specs) {
  Validated<std::vector<LeaderboardKey>> out;
  std::set<std::string> ids;
  std::vector<LeaderboardKey> keys;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!ids.insert(specs[i].id).second) {
      out.diagnostics.push_back({Errc::DuplicateId, "[" + std::to_string(i) + "].id",
                                 "duplicate challenge id '" + specs[i].id + "'", std::nullopt,
                                 std::nullopt});
      continue;
    }
    for (const auto &area : specs[i].areas) keys.push_back({specs[i].id, area});
  }
  if (out.diagnostics.empty()) {
    std::sort(keys.begin(), keys.end());
    out.value = std::move(keys);
  }
  return out;
}

Registry::Registry(std::vector<ChallengeSpec> specs, std::filesystem::path data_root)
    : specs_(std::move(specs)), data_root_(std::move(data_root)) {
  std::sort(specs_.begin(), specs_.end(),
            [](const ChallengeSpec &a, const ChallengeSpec &b) { return a.id < b.id; });
}

Validated<Registry> Registry::load_directory(const std::filesystem::path &dir,
                                             std::optional<std::filesystem::path> data_root) {
  Validated<Registry> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    out.diagnostics.push_back({Errc::Io, dir.string(), "config directory does not exist",
                               std::nullopt, std::nullopt});
    return out;
  }
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ChallengeSpec> specs;
  for (const auto &file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = parse_challenge(buf.str());
    for (auto d : parsed.diagnostics) {
      d.path = file.filename().string() + (d.path.empty() ? "" : ":" + d.path);
      out.diagnostics.push_back(std::move(d));
    }
    if (parsed) specs.push_back(*parsed.value);
  }
  auto reg = validate_registry(specs);
  for (auto &d : reg.diagnostics) out.diagnostics.push_back(std::move(d));
  if (out.diagnostics.empty()) out.value = Registry(std::move(specs), data_root.value_or(dir));
  return out;
}

const ChallengeSpec *Registry::find(std::string_view id) const {
  for (const auto &s : specs_)
    if (s.id == id) return &s;
  return nullptr;
}

const ChallengeSpec &Registry::get(std::string_view id) const {
  if (auto *s = find(id)) return *s;
  throw Error(Errc::UnknownChallenge, "unknown challenge '" + std::string(id) + "'");
}

std::vector<LeaderboardKey> Registry::keys() const {
  return *validate_registry(specs_).value;
}

}  // namespace arena
