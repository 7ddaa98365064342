#include "stylefactor/log.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace stylefactor::log {
namespace {

std::shared_ptr<spdlog::logger> Logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> logger;
  std::call_once(once, [] {
    // Logs go to stderr so CLI stdout stays a clean JSON payload.
    logger = spdlog::stderr_color_mt("stylefactor");
    logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
    logger->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("STYLEFACTOR_LOG")) {
      logger->set_level(spdlog::level::from_str(env));
    }
  });
  return logger;
}

}  // namespace

void Configure() { Logger(); }

void SetLevel(const std::string& level) {
  Logger()->set_level(spdlog::level::from_str(level));
}

void Debug(const std::string& message) { Logger()->debug(message); }
void Info(const std::string& message) { Logger()->info(message); }
void Warn(const std::string& message) { Logger()->warn(message); }

}  // namespace stylefactor::log
