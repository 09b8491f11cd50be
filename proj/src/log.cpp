#include "maire/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

namespace maire {

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto l = std::make_shared<spdlog::logger>("maire", sink);
    l->set_pattern("maire %l: %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MAIRE_LOG")) {
      l->set_level(spdlog::level::from_str(env));
    }
    return l;
  }();
  return *logger;
}

}  // namespace maire
