#pragma once

#include <functional>
#include <string>

namespace micp {

enum class LogLevel { Debug, Info, Warning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink. The default writes warnings to stderr.
void set_log_sink(LogSink sink);
void log_message(LogLevel level, const std::string& msg);

inline void log_warning(const std::string& msg) { log_message(LogLevel::Warning, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::Info, msg); }

}  // namespace micp
