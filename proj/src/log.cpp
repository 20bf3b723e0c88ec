#include "instability/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace instab {

namespace {

LogLevel level_from_env() {
  const char* v = std::getenv("INSTABILITY_LOG");
  if (!v) return LogLevel::error;
  const std::string s(v);
  if (s == "debug") return LogLevel::debug;
  if (s == "info") return LogLevel::info;
  return LogLevel::error;
}

std::atomic<int>& level_ref() {
  static std::atomic<int> level{static_cast<int>(level_from_env())};
  return level;
}

std::mutex& out_mutex() {
  static std::mutex m;
  return m;
}

const char* name(LogLevel l) {
  switch (l) {
    case LogLevel::error:
      return "error";
    case LogLevel::info:
      return "info";
    case LogLevel::debug:
      return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_ref().load()); }

void set_log_level(LogLevel level) { level_ref().store(static_cast<int>(level)); }

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > level_ref().load()) return;
  std::lock_guard<std::mutex> lock(out_mutex());
  std::cerr << "[" << name(level) << "] " << message << '\n';
}

}  // namespace instab
