#include "icstrace/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace icstrace {

LogLevel log_threshold() {
    static LogLevel level = [] {
        const char* env = std::getenv("ICSTRACE_LOG");
        if (!env) return LogLevel::warn;
        if (std::strcmp(env, "error") == 0) return LogLevel::error;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

void log(LogLevel level, const std::string& message) {
    if (level > log_threshold()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "icstrace %s: %s\n", names[static_cast<int>(level)], message.c_str());
}

} // namespace icstrace
