#pragma once

#include <optional>
#include <string>

#include "arena/leaderboard.hpp"
#include "arena/store.hpp"

namespace arena {

enum class ExportKind { Scores, Leaderboard, Submissions };

std::optional<ExportKind> parse_export_kind(std::string_view text);

struct ExportFilters {
  std::optional<std::string> challenge_id;
  std::optional<std::string> area;
  /// Every ground-truth version instead of the latest scoring per event.
  bool all_versions = false;
  /// Operator only: include participants whose forecasts are private.
  bool include_private = false;
};

/// `participant,challenge,area,delivery_date,metric,value,ground_truth_version,scored_at`
std::string export_scores(const Store &store, const ExportFilters &filters);

/// `submission_id,participant,challenge,area,delivery_date,received_at,payload`
std::string export_submissions(const Store &store, const ExportFilters &filters);

/// Writes `content` to `path`; throws Error(Io) on failure.
void write_file(const std::filesystem::path &path, const std::string &content);

}  // namespace arena
