#pragma once

#include <spdlog/spdlog.h>

#include <utility>

namespace nehari::logging {

/// Applies NEHARI_LOG (quiet | info | trace) to the default logger. Unset
/// means quiet. Called once, lazily, by the helpers below.
void configure_from_env();

template <class... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  configure_from_env();
  spdlog::info(fmt, std::forward<Args>(args)...);
}

template <class... Args>
void trace(fmt::format_string<Args...> fmt, Args&&... args) {
  configure_from_env();
  spdlog::trace(fmt, std::forward<Args>(args)...);
}

}  // namespace nehari::logging
