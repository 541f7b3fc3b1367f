#include "arena/error.hpp"

#include <sstream>

namespace arena {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::Syntax: return "SYNTAX";
    case Errc::MissingField: return "MISSING_FIELD";
    case Errc::BadValue: return "BAD_VALUE";
    case Errc::IncompatibleMetric: return "INCOMPATIBLE_METRIC";
    case Errc::DuplicateId: return "DUPLICATE_ID";
    case Errc::AmbiguousLocalTime: return "AMBIGUOUS_LOCAL_TIME";
    case Errc::NonexistentLocalTime: return "NONEXISTENT_LOCAL_TIME";
    case Errc::UnknownTimezone: return "UNKNOWN_TIMEZONE";
    case Errc::Unauthenticated: return "UNAUTHENTICATED";
    case Errc::NotFound: return "NOT_FOUND";
    case Errc::GateClosed: return "GATE_CLOSED";
    case Errc::Validation: return "VALIDATION";
    case Errc::UnknownEvent: return "UNKNOWN_EVENT";
    case Errc::MissingTimestamp: return "MISSING_TIMESTAMP";
    case Errc::ExtraTimestamp: return "EXTRA_TIMESTAMP";
    case Errc::OutOfRange: return "OUT_OF_RANGE";
    case Errc::NonFinite: return "NON_FINITE";
    case Errc::QuantileCrossing: return "QUANTILE_CROSSING";
    case Errc::LevelMismatch: return "LEVEL_MISMATCH";
    case Errc::EmptyPayload: return "EMPTY_PAYLOAD";
    case Errc::KindNotAllowed: return "KIND_NOT_ALLOWED";
    case Errc::TooManyMembers: return "TOO_MANY_MEMBERS";
    case Errc::LengthMismatch: return "LENGTH_MISMATCH";
    case Errc::BadLevel: return "BAD_LEVEL";
    case Errc::Crossing: return "CROSSING";
    case Errc::EmptyEnsemble: return "EMPTY_ENSEMBLE";
    case Errc::InvertedInterval: return "INVERTED_INTERVAL";
    case Errc::BadAlpha: return "BAD_ALPHA";
    case Errc::AsymmetricGrid: return "ASYMMETRIC_GRID";
    case Errc::NoMedian: return "NO_MEDIAN";
    case Errc::IncompleteGroundTruth: return "INCOMPLETE_GROUND_TRUTH";
    case Errc::NoCompatibleRepresentation: return "NO_COMPATIBLE_REPRESENTATION";
    case Errc::SourceUnavailable: return "SOURCE_UNAVAILABLE";
    case Errc::Parse: return "PARSE";
    case Errc::UnscoredEvent: return "UNSCORED_EVENT";
    case Errc::UnknownWindow: return "UNKNOWN_WINDOW";
    case Errc::UnknownArea: return "UNKNOWN_AREA";
    case Errc::UnknownChallenge: return "UNKNOWN_CHALLENGE";
    case Errc::UnknownMetric: return "UNKNOWN_METRIC";
    case Errc::Store: return "STORE";
    case Errc::Io: return "IO";
    case Errc::UnknownKind: return "UNKNOWN_KIND";
  }
  return "UNKNOWN";
}

std::string format_diagnostics(const Diagnostics &diagnostics) {
  std::ostringstream out;
  for (const auto &d : diagnostics) {
    out << to_string(d.code);
    if (!d.path.empty()) out << " at " << d.path;
    if (!d.message.empty()) out << ": " << d.message;
    out << '\n';
  }
  return out.str();
}

}  // namespace arena
