#pragma once

#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace arena::log {

enum class Level { Debug, Info, Warn, Error };

/// Receives one fully formed JSON object per log line.
using Sink = std::function<void(const nlohmann::json &)>;

/// Replaces the process-wide sink; returns the previous one. The default sink
/// writes line-delimited JSON to stderr.
Sink set_sink(Sink sink);
void set_min_level(Level level);

void write(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void debug(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  write(Level::Debug, event, std::move(fields));
}
inline void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  write(Level::Info, event, std::move(fields));
}
inline void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  write(Level::Warn, event, std::move(fields));
}
inline void error(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  write(Level::Error, event, std::move(fields));
}

}  // namespace arena::log
