#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace handpose {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Verbosity comes from HANDPOSE_LOG (error | info | debug); anything else,
// including an unset variable, means errors only. Read once per process.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* raw = std::getenv("HANDPOSE_LOG");
    const std::string value = raw ? raw : "";
    if (value == "debug") return LogLevel::kDebug;
    if (value == "info") return LogLevel::kInfo;
    return LogLevel::kError;
  }();
  return level;
}

// Logs go to stderr so stdout carries only command output.
inline void log_line(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  const char* tag = level == LogLevel::kDebug ? "debug" : level == LogLevel::kInfo ? "info" : "error";
  std::cerr << '[' << tag << "] " << message << '\n';
}

inline void log_error(const std::string& message) { log_line(LogLevel::kError, message); }
inline void log_info(const std::string& message) { log_line(LogLevel::kInfo, message); }
inline void log_debug(const std::string& message) { log_line(LogLevel::kDebug, message); }

}  // namespace handpose
