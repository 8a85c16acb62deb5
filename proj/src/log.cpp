/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace sdwban {

namespace {

LogLevel parse_env_level() {
    const char* env = std::getenv("SDWBAN_LOG_LEVEL");
    if (env == nullptr) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    std::fprintf(stderr, "sdwban: ignoring unknown SDWBAN_LOG_LEVEL '%s'\n", env);
    return LogLevel::Warn;
}

LogLevel& current_level() {
    static LogLevel level = parse_env_level();
    return level;
}

const char* level_name(LogLevel level) {
    switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    }
    return "?";
}

} // namespace

LogLevel log_level() {
    return current_level();
}

void set_log_level(LogLevel level) {
    current_level() = level;
}

void log_line(LogLevel level, const std::string& text) {
    std::fprintf(stderr, "[sdwban %s] %s\n", level_name(level), text.c_str());
}

} // namespace sdwban
