#pragma once

#include <string>

namespace fence {

enum class LogLevel { debug, info, warn, error, off };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_message(LogLevel level, const std::string& message);

inline void log_info(const std::string& message) { log_message(LogLevel::info, message); }
inline void log_warn(const std::string& message) { log_message(LogLevel::warn, message); }

}  // namespace fence
