#include "nalloc/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace nalloc {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("NALLOC_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

namespace {

void emit(const char* tag, const std::string& message) {
  std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

}  // namespace

void log_error(const std::string& message) { emit("error", message); }

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::Info) emit("info", message);
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::Debug) emit("debug", message);
}

}  // namespace nalloc
