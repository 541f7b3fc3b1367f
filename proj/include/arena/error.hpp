#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arena {

enum class Errc {
  // challenge-config
  Syntax,
  MissingField,
  BadValue,
  IncompatibleMetric,
  DuplicateId,
  // temporal
  AmbiguousLocalTime,
  NonexistentLocalTime,
  UnknownTimezone,
  // submissions
  Unauthenticated,
  NotFound,
  GateClosed,
  Validation,
  UnknownEvent,
  MissingTimestamp,
  ExtraTimestamp,
  OutOfRange,
  NonFinite,
  QuantileCrossing,
  LevelMismatch,
  EmptyPayload,
  KindNotAllowed,
  TooManyMembers,
  // scoring
  LengthMismatch,
  BadLevel,
  Crossing,
  EmptyEnsemble,
  InvertedInterval,
  BadAlpha,
  AsymmetricGrid,
  NoMedian,
  IncompleteGroundTruth,
  NoCompatibleRepresentation,
  // ingest
  SourceUnavailable,
  Parse,
  // leaderboard
  UnscoredEvent,
  UnknownWindow,
  UnknownArea,
  UnknownChallenge,
  UnknownMetric,
  // plumbing
  Store,
  Io,
  UnknownKind,
};

/// Upper snake case name, e.g. "GATE_CLOSED".
std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// One reported problem. `path` is a document path such as `windows[2]` or
/// `quantiles.values[1][5]`.
struct Diagnostic {
  Errc code;
  std::string path;
  std::string message;
  std::optional<std::string> timestamp{};
  std::optional<double> level{};

  bool operator==(const Diagnostic &) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

std::string format_diagnostics(const Diagnostics &diagnostics);

/// Either a value or the complete list of diagnostics that prevented it.
template <typename T>
struct Validated {
  std::optional<T> value;
  Diagnostics diagnostics;

  bool ok() const { return value.has_value(); }
  explicit operator bool() const { return ok(); }
  const T &operator*() const { return *value; }
  const T *operator->() const { return &*value; }
};

/// An Error carrying the full diagnostic list (payload validation, config).
class ValidationError : public Error {
 public:
  ValidationError(Errc code, Diagnostics diagnostics)
      : Error(code, format_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const Diagnostics &diagnostics() const { return diagnostics_; }

 private:
  Diagnostics diagnostics_;
};

}  // namespace arena
