#include "micp/log.hpp"

#include <iostream>
#include <mutex>

namespace micp {
namespace {

std::mutex g_mutex;

LogSink& sink() {
  static LogSink s = [](LogLevel level, const std::string& msg) {
    if (level == LogLevel::Warning) std::cerr << "warning: " << msg << '\n';
  };
  return s;
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard<std::mutex> lock(g_mutex);
  sink() = std::move(s);
}

void log_message(LogLevel level, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (sink()) sink()(level, msg);
}

}  // namespace micp
