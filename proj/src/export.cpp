#include "arena/export.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace arena {

std::optional<ExportKind> parse_export_kind(std::string_view text) {
  if (text == "scores") return ExportKind::Scores;
  if (text == "leaderboard") return ExportKind::Leaderboard;
  if (text == "submissions") return ExportKind::Submissions;
  return std::nullopt;
}

namespace {

bool matches(const ExportFilters &f, const EventRef &e) {
  return (!f.challenge_id || *f.challenge_id == e.challenge_id) && (!f.area || *f.area == e.area);
}

std::string quote(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string export_scores(const Store &store, const ExportFilters &filters) {
  std::ostringstream out;
  out << "participant,challenge,area,delivery_date,metric,value,ground_truth_version,scored_at\n";
  std::map<EventRef, std::string> effective;
  for (const auto &r : store.all_scores()) {
    if (!matches(filters, r.event)) continue;
    if (!filters.all_versions) {
      auto it = effective.find(r.event);
      if (it == effective.end()) {
        const auto scoring = store.latest_event_scoring(r.event);
        it = effective.emplace(r.event, scoring ? scoring->version_id : std::string()).first;
      }
      if (it->second != r.ground_truth_version) continue;
    }
    out << quote(r.participant_id) << ',' << r.event.challenge_id << ',' << r.event.area << ','
        << format_date(r.event.delivery_date) << ',' << quote(r.metric) << ',' << nlohmann::json(r.value).dump() << ','
        << r.ground_truth_version << ',' << format_instant(r.scored_at) << '\n';
  }
  return out.str();
}

std::string export_submissions(const Store &store, const ExportFilters &filters) {
  std::ostringstream out;
  out << "submission_id,participant,challenge,area,delivery_date,received_at,payload\n";
  std::map<std::string, bool> visible;
  for (const auto &p : store.participants()) visible[p.id] = p.forecasts_public;
  for (const auto &s : store.all_submissions()) {
    if (!matches(filters, s.event)) continue;
    if (!filters.include_private && !visible[s.participant_id]) continue;
    out << s.id << ',' << quote(s.participant_id) << ',' << s.event.challenge_id << ',' << s.event.area << ','
        << format_date(s.event.delivery_date) << ',' << format_instant(s.received_at) << ','
        << quote(s.payload_json) << '\n';
  }
  return out.str();
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error(Errc::Io, "failed writing " + path.string());
}

}  // namespace arena
