#pragma once

// Minimal stderr logger; level comes from INSTABILITY_LOG (error|info|debug).

#include <string>

namespace instab {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& message);

}  // namespace instab
