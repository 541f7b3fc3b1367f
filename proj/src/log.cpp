#include "arena/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace arena::log {

namespace {

std::mutex sink_mutex;
std::atomic<Level> min_level{Level::Info};

void stderr_sink(const nlohmann::json &line) { std::cerr << line.dump() << '\n'; }

Sink &current_sink() {
  static Sink sink = stderr_sink;
  return sink;
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "info";
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex);
  auto previous = std::move(current_sink());
  current_sink() = sink ? std::move(sink) : Sink{stderr_sink};
  return previous;
}

void set_min_level(Level level) { min_level = level; }

void write(Level level, std::string_view event, nlohmann::json fields) {
  if (level < min_level.load()) return;
  nlohmann::json line = nlohmann::json::object();
  line["level"] = level_name(level);
  line["event"] = event;
  if (fields.is_object())
    for (auto &[k, v] : fields.items()) line[k] = v;
  std::lock_guard lock(sink_mutex);
  current_sink()(line);
}

}  // namespace arena::log
