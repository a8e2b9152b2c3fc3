#pragma once

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <utility>

namespace tucker::log {

/// Configure the stderr logger from the TUCKER_LOG environment variable
/// ("error", "info", or "debug"; default "error"). Called lazily by the
/// logging wrappers, so explicit initialization is optional.
void init_from_env();

namespace detail {
spdlog::logger& logger();

template <class... Args>
void emit(spdlog::level::level_enum level, const char* f, Args&&... args) {
  spdlog::logger& lg = logger();
  if (!lg.should_log(level)) return;
  lg.log(level, "{}", fmt::format(fmt::runtime(f), std::forward<Args>(args)...));
}
}  // namespace detail

template <class... Args>
void debug(const char* f, Args&&... args) {
  detail::emit(spdlog::level::debug, f, std::forward<Args>(args)...);
}

template <class... Args>
void info(const char* f, Args&&... args) {
  detail::emit(spdlog::level::info, f, std::forward<Args>(args)...);
}

template <class... Args>
void warn(const char* f, Args&&... args) {
  detail::emit(spdlog::level::warn, f, std::forward<Args>(args)...);
}

template <class... Args>
void error(const char* f, Args&&... args) {
  detail::emit(spdlog::level::err, f, std::forward<Args>(args)...);
}

}  // namespace tucker::log
