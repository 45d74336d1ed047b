#include "fence/log.hpp"

#include <atomic>
#include <cstdio>

namespace fence {

namespace {
std::atomic<LogLevel> g_level{LogLevel::warn};

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
        case LogLevel::off: return "off";
    }
    return "info";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }

LogLevel log_level() { return g_level.load(); }

void log_message(LogLevel level, const std::string& message) {
    if (level < g_level.load()) return;
    std::fprintf(stderr, "[fence %s] %s\n", level_name(level), message.c_str());
}

}  // namespace fence
