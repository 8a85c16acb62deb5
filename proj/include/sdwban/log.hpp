/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_LOG_HPP
#define SDWBAN_LOG_HPP

#include <sstream>
#include <string>

namespace sdwban {

enum class LogLevel : int {
    Error = 0,
    Warn = 1,
    Info = 2,
    Debug = 3,
};

// Level comes from SDWBAN_LOG_LEVEL (error|warn|info|debug); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_line(LogLevel level, const std::string& text);

} // namespace sdwban

#define SDWBAN_LOG(level, expr)                                                \
    do {                                                                       \
        if (static_cast<int>(level) <= static_cast<int>(::sdwban::log_level())) { \
            std::ostringstream oss_;                                           \
            oss_ << expr;                                                      \
            ::sdwban::log_line(level, oss_.str());                             \
        }                                                                      \
    } while (0)

#define LOG_ERROR(expr) SDWBAN_LOG(::sdwban::LogLevel::Error, expr)
#define LOG_WARN(expr) SDWBAN_LOG(::sdwban::LogLevel::Warn, expr)
#define LOG_INFO(expr) SDWBAN_LOG(::sdwban::LogLevel::Info, expr)
#define LOG_DEBUG(expr) SDWBAN_LOG(::sdwban::LogLevel::Debug, expr)

#endif // SDWBAN_LOG_HPP
