#include "nehari/logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <mutex>
#include <string>

namespace nehari::logging {

void configure_from_env() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("nehari");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("NEHARI_LOG");
    const std::string level = env ? env : "quiet";
    if (level == "trace") spdlog::set_level(spdlog::level::trace);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else spdlog::set_level(spdlog::level::off);
  });
}

}  // namespace nehari::logging
