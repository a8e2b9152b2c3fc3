#include "tucker/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <mutex>
#include <string>

namespace tucker::log {
namespace {

std::once_flag init_flag;
std::shared_ptr<spdlog::logger> instance;

void do_init() {
  instance = spdlog::stderr_color_mt("tucker");
  spdlog::level::level_enum level = spdlog::level::err;
  if (const char* env = std::getenv("TUCKER_LOG")) {
    const std::string value(env);
    if (value == "debug") {
      level = spdlog::level::debug;
    } else if (value == "info") {
      level = spdlog::level::info;
    } else if (value == "error") {
      level = spdlog::level::err;
    } else if (!value.empty()) {
      instance->set_level(spdlog::level::err);
      instance->error("unknown TUCKER_LOG level '{}', using 'error'", value);
    }
  }
  instance->set_level(level);
}

}  // namespace

void init_from_env() { std::call_once(init_flag, do_init); }

namespace detail {
spdlog::logger& logger() {
  init_from_env();
  return *instance;
}
}  // namespace detail

}  // namespace tucker::log
