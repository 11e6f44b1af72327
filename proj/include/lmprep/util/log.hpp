#pragma once

#include <cstdarg>
#include <cstdio>
#include <string>

namespace lmprep::util {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

LogLevel log_level();
void set_log_level(LogLevel level);
bool set_log_level(const std::string& name); // "debug"|"info"|"warn"|"error"|"off"

// printf-style logging to stderr. Cheap enough that call sites don't need
// level guards.
void log(LogLevel level, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

#define LMPREP_LOG_DEBUG(...) ::lmprep::util::log(::lmprep::util::LogLevel::debug, __VA_ARGS__)
#define LMPREP_LOG_INFO(...) ::lmprep::util::log(::lmprep::util::LogLevel::info, __VA_ARGS__)
#define LMPREP_LOG_WARN(...) ::lmprep::util::log(::lmprep::util::LogLevel::warn, __VA_ARGS__)
#define LMPREP_LOG_ERROR(...) ::lmprep::util::log(::lmprep::util::LogLevel::error, __VA_ARGS__)

} // namespace lmprep::util
